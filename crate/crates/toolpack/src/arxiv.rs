//! `arxiv` server: paper search, metadata and download.

use agentx_core::{net, Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;
use serde::{Deserialize, Serialize};

use crate::fixtures::{self, FixtureSet};
use crate::place::Location;
use crate::{handler, opt_u64, str_arg, LiveConfig, Mode, Tool, ToolError, ToolpackConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub published: String,
    pub summary: String,
    /// Text file under `fixtures/arxiv/`; empty for live results.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub file: String,
}

impl Article {
    fn listing(&self) -> serde_json::Value {
        let summary: String = self.summary.chars().take(300).collect();
        serde_json::json!({
            "id": self.id,
            "title": self.title,
            "authors": self.authors,
            "published": self.published,
            "summary": summary,
        })
    }
}

fn bare_id(s: &str) -> String {
    let s = s.trim();
    let s = s
        .strip_prefix("arxiv:")
        .or_else(|| s.strip_prefix("arXiv:"))
        .unwrap_or(s);
    match s.rfind('v') {
        Some(i)
            if i > 0
                && s[i + 1..].chars().all(|c| c.is_ascii_digit())
                && !s[i + 1..].is_empty() =>
        {
            s[..i].to_string()
        }
        _ => s.to_string(),
    }
}

pub struct Catalog {
    fx: FixtureSet,
    articles: Vec<Article>,
}

impl Catalog {
    pub fn load(fx: FixtureSet) -> Result<Self, ToolError> {
        let articles = fx.read_json("arxiv", "index.json")?;
        Ok(Catalog { fx, articles })
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn search(&self, query: &str, max: usize) -> Vec<&Article> {
        let q = fixtures::content_words(query);
        let mut scored: Vec<(usize, usize, &Article)> = self
            .articles
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let words = fixtures::content_words(&format!("{} {}", a.title, a.summary));
                (q.iter().filter(|w| words.contains(w)).count(), i, a)
            })
            .filter(|&(n, _, _)| n > 0)
            .collect();
        scored.sort_by_key(|&(n, i, _)| (std::cmp::Reverse(n), i));
        scored.into_iter().take(max).map(|(_, _, a)| a).collect()
    }

    /// Exact id or normalized-title match; otherwise NotFound listing the
    /// closest known titles.
    pub fn find(&self, title_or_id: &str) -> Result<&Article, ToolError> {
        let id = bare_id(title_or_id);
        let title = fixtures::normalize(title_or_id);
        if let Some(a) = self
            .articles
            .iter()
            .find(|a| a.id == id || fixtures::normalize(&a.title) == title)
        {
            return Ok(a);
        }
        let mut suggestions: Vec<&str> = self
            .search(title_or_id, 3)
            .iter()
            .map(|a| a.title.as_str())
            .collect();
        if suggestions.is_empty() {
            suggestions = self
                .articles
                .iter()
                .take(3)
                .map(|a| a.title.as_str())
                .collect();
        }
        Err(ToolError::NotFound(format!(
            "no article matches {title_or_id:?}; did you mean: {}",
            suggestions.join(" | ")
        )))
    }

    pub fn text(&self, a: &Article) -> Result<String, ToolError> {
        self.fx.read_text("arxiv", &a.file)
    }
}

fn tag<'a>(xml: &'a str, name: &str) -> Option<&'a str> {
    let open = format!("<{name}");
    let start = xml.find(&open)?;
    let body = start + xml[start..].find('>')? + 1;
    let end = body + xml[body..].find(&format!("</{name}>"))?;
    Some(xml[body..end].trim())
}

/// Minimal Atom feed reader for the arXiv export API.
pub fn parse_atom(xml: &str) -> Vec<Article> {
    xml.split("<entry>")
        .skip(1)
        .map(|entry| {
            let id_url = tag(entry, "id").unwrap_or_default();
            let squash = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
            Article {
                id: bare_id(id_url.rsplit("/abs/").next().unwrap_or(id_url)),
                title: squash(tag(entry, "title").unwrap_or_default()),
                authors: entry
                    .split("<author>")
                    .skip(1)
                    .filter_map(|a| tag(a, "name").map(str::to_string))
                    .collect(),
                published: tag(entry, "published")
                    .unwrap_or_default()
                    .chars()
                    .take(10)
                    .collect(),
                summary: squash(tag(entry, "summary").unwrap_or_default()),
                file: String::new(),
            }
        })
        .collect()
}

fn live_query(live: &LiveConfig, query: &str) -> Result<Vec<Article>, ToolError> {
    net::guard(&live.arxiv_url).map_err(|e| ToolError::Upstream(e.to_string()))?;
    let mut resp = crate::http_agent(live.timeout_s)
        .get(&live.arxiv_url)
        .query_pairs([
            ("search_query", query),
            ("start", "0"),
            ("max_results", "20"),
        ])
        .call()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    Ok(parse_atom(&body))
}

fn live_pdf(live: &LiveConfig, id: &str) -> Result<Vec<u8>, ToolError> {
    let url = format!("https://arxiv.org/pdf/{id}");
    net::guard(&url).map_err(|e| ToolError::Upstream(e.to_string()))?;
    let mut resp = crate::http_agent(live.timeout_s)
        .get(&url)
        .call()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    if !resp.status().is_success() {
        return Err(ToolError::NotFound(format!(
            "{url} returned {}",
            resp.status()
        )));
    }
    resp.body_mut()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_vec()
        .map_err(|e| ToolError::Upstream(e.to_string()))
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let fx = FixtureSet::new(&cfg.fixtures);
    let catalog = std::sync::Arc::new(Catalog::load(fx).unwrap_or_else(|_| Catalog {
        fx: FixtureSet::new(&cfg.fixtures),
        articles: Vec::new(),
    }));
    let mode = cfg.mode;
    let live = cfg.live.clone();
    let blobs = cfg.blobs.clone();
    let full = cfg.load_full_articles;

    let (c1, l1) = (catalog.clone(), live.clone());
    let search = handler(move |_ctx, args| {
        let query = str_arg(args, "query")?;
        let max = opt_u64(args, "max_results", 5)?.clamp(1, 20) as usize;
        let listing: Vec<serde_json::Value> = match mode {
            Mode::Fixture => c1.search(query, max).iter().map(|a| a.listing()).collect(),
            Mode::Live => live_query(&l1, &format!("all:{query}"))?
                .iter()
                .take(max)
                .map(Article::listing)
                .collect(),
        };
        Ok(ToolResult::ok(
            serde_json::to_string_pretty(&listing).expect("serializes"),
        ))
    });

    let (c2, l2) = (catalog.clone(), live.clone());
    let details = handler(move |_ctx, args| {
        let id = str_arg(args, "paper_id")?;
        let a = match mode {
            Mode::Fixture => c2.find(id)?.clone(),
            Mode::Live => live_query(&l2, &format!("id:{}", bare_id(id)))?
                .into_iter()
                .next()
                .ok_or_else(|| ToolError::NotFound(id.to_string()))?,
        };
        let mut v = serde_json::to_value(&a).expect("serializes");
        v.as_object_mut().expect("object").remove("file");
        Ok(ToolResult::ok(
            serde_json::to_string_pretty(&v).expect("serializes"),
        ))
    });

    let (c3, l3) = (catalog.clone(), live.clone());
    let download = handler(move |ctx, args| {
        let which = str_arg(args, "title_or_id")?;
        let dest = args.get("dest").and_then(|v| v.as_str()).unwrap_or(".");
        let (id, bytes, ext) = match mode {
            Mode::Fixture => {
                let a = c3.find(which)?;
                (a.id.clone(), c3.text(a)?.into_bytes(), "txt")
            }
            Mode::Live => {
                let id = bare_id(which);
                (id.clone(), live_pdf(&l3, &id)?, "pdf")
            }
        };
        let mut loc = Location::parse(&ctx.workspace, dest)?;
        if loc.is_dir_like() {
            loc = loc.join(&format!("{id}.{ext}"))?;
        }
        let uri = loc.write(&blobs, &bytes)?;
        Ok(ToolResult::ok(format!(
            "Downloaded article {id} ({} bytes) to {uri}",
            bytes.len()
        ))
        .with_uris(vec![uri]))
    });

    let c4 = catalog;
    let load = handler(move |_ctx, args| {
        let which = str_arg(args, "title_or_id")?;
        if !full {
            return Err(ToolError::InvalidArgument(
                "loading full articles is disabled; query the document retriever instead".into(),
            ));
        }
        match mode {
            Mode::Fixture => {
                let a = c4.find(which)?;
                Ok(ToolResult::ok(c4.text(a)?))
            }
            Mode::Live => Err(ToolError::Upstream(
                "PDF text extraction is not available in live mode".into(),
            )),
        }
    });

    vec![
        Tool {
            descriptor: ToolDescriptor::new(
                "arxiv",
                "search_papers",
                "Search arXiv for papers matching a query. Returns ids, titles, authors and abstracts.",
                Origin::Community,
            )
            .param(ParamSpec::required("query", ParamType::String, "Search terms."))
            .param(ParamSpec::optional("max_results", ParamType::Integer, "Maximum results (default 5).").range(1, 20)),
            handler: search,
            exclusive: false,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "arxiv",
                "get_details",
                "Get the metadata of an arXiv article: title, authors, publication date and abstract.",
                Origin::Community,
            )
            .param(ParamSpec::required("paper_id", ParamType::String, "arXiv id or exact title.")),
            handler: details,
            exclusive: false,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "arxiv",
                "download_article",
                "Download the article hosted on arXiv.org and store it at dest, a workspace path or s3:// URI. \
                 Returns the stored location.",
                Origin::Community,
            )
            .param(ParamSpec::required("title_or_id", ParamType::String, "Exact title or arXiv id."))
            .param(ParamSpec::optional("dest", ParamType::String, "Destination file or directory (default: workspace root).")),
            handler: download,
            exclusive: true,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "arxiv",
                "load_article_to_context",
                "Load the article hosted on arXiv.org into context.",
                Origin::Community,
            )
            .param(ParamSpec::required("title_or_id", ParamType::String, "Exact title or arXiv id.")),
            handler: load,
            exclusive: false,
        },
    ]
}
