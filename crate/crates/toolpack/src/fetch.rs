//! `fetch` server: page retrieval with character-window pagination.

use std::collections::BTreeMap;

use agentx_core::{net, Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;

use crate::fixtures::FixtureSet;
use crate::{handler, opt_u64, str_arg, LiveConfig, Mode, Tool, ToolError, ToolpackConfig};

pub const DEFAULT_MAX_LENGTH: usize = 5000;

pub fn truncation_notice(next: usize) -> String {
    format!("<error>Content truncated. Call the fetch tool with a start_index of {next} to get more content.</error>")
}

/// `content[start..start+max]` in characters, followed by the truncation
/// notice when characters remain.
pub fn paginate(content: &str, start: usize, max: usize) -> String {
    let mut idx = content.char_indices().map(|(i, _)| i).skip(start);
    let Some(from) = idx.next() else {
        return String::new();
    };
    let to = content[from..]
        .char_indices()
        .nth(max)
        .map(|(i, _)| from + i);
    match to {
        Some(to) => format!("{}{}", &content[from..to], truncation_notice(start + max)),
        None => content[from..].to_string(),
    }
}

/// Splits a paginated response into the content window and the next start
/// index, if the notice is present.
pub fn split_notice(page: &str) -> (&str, Option<usize>) {
    const HEAD: &str = "<error>Content truncated. Call the fetch tool with a start_index of ";
    match page.rfind(HEAD) {
        Some(at) if page.ends_with("</error>") => {
            let rest = &page[at + HEAD.len()..];
            let next = rest.split(' ').next().and_then(|n| n.parse().ok());
            match next {
                Some(n) => (&page[..at], Some(n)),
                None => (page, None),
            }
        }
        _ => (page, None),
    }
}

fn canonical_url(url: &str) -> String {
    url.trim().trim_end_matches('/').to_string()
}

pub fn fixture_page(fx: &FixtureSet, url: &str) -> Result<String, ToolError> {
    let index: BTreeMap<String, String> = fx.read_json("fetch", "index.json")?;
    let wanted = canonical_url(url);
    let file = index
        .iter()
        .find(|(u, _)| canonical_url(u) == wanted)
        .map(|(_, f)| f)
        .ok_or_else(|| ToolError::NotFound(format!("{url} (no fixture page)")))?;
    fx.read_text("fetch", file)
}

/// Drops scripts, styles and tags and collapses blank runs.
pub fn html_to_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len() / 2);
    let lower = html.to_ascii_lowercase();
    let mut i = 0;
    while i < html.len() {
        if html[i..].starts_with('<') {
            let skip_block = ["script", "style"]
                .into_iter()
                .find(|t| lower[i + 1..].starts_with(t));
            let end = match skip_block {
                Some(t) => lower[i..]
                    .find(&format!("</{t}>"))
                    .map(|e| i + e + t.len() + 3),
                None => html[i..].find('>').map(|e| i + e + 1),
            };
            i = end.unwrap_or(html.len());
            out.push(' ');
        } else {
            let next = html[i..].find('<').map_or(html.len(), |e| i + e);
            out.push_str(&html[i..next]);
            i = next;
        }
    }
    out.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn live_page(live: &LiveConfig, url: &str, raw: bool) -> Result<String, ToolError> {
    net::guard(url).map_err(|e| ToolError::Upstream(e.to_string()))?;
    let mut resp = crate::http_agent(live.timeout_s)
        .get(url)
        .call()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    if !resp.status().is_success() {
        return Err(ToolError::NotFound(format!(
            "{url} returned {}",
            resp.status()
        )));
    }
    let html = resp
        .headers()
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .is_some_and(|c| c.contains("html"));
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    Ok(if html && !raw {
        html_to_text(&body)
    } else {
        body
    })
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let fx = FixtureSet::new(&cfg.fixtures);
    let mode = cfg.mode;
    let live = cfg.live.clone();
    vec![Tool {
        descriptor: ToolDescriptor::new(
            "fetch",
            "fetch",
            "Fetches a URL from the internet and optionally extracts its contents as markdown. \
             Responses longer than max_length characters are truncated; continue with start_index.",
            Origin::Official,
        )
        .param(ParamSpec::required(
            "url",
            ParamType::String,
            "URL to fetch.",
        ))
        .param(
            ParamSpec::optional(
                "max_length",
                ParamType::Integer,
                "Maximum number of characters to return (default 5000).",
            )
            .range(1, 1_000_000),
        )
        .param(
            ParamSpec::optional(
                "start_index",
                ParamType::Integer,
                "Character offset to start from (default 0).",
            )
            .range(0, i64::MAX),
        )
        .param(ParamSpec::optional(
            "raw",
            ParamType::Boolean,
            "Return the raw page without simplification.",
        )),
        handler: handler(move |_ctx, args| {
            let url = str_arg(args, "url")?;
            let max = opt_u64(args, "max_length", DEFAULT_MAX_LENGTH as u64)?.max(1) as usize;
            let start = opt_u64(args, "start_index", 0)? as usize;
            let raw = args.get("raw").and_then(|v| v.as_bool()).unwrap_or(false);
            let page = match mode {
                Mode::Fixture => fixture_page(&fx, url)?,
                Mode::Live => live_page(&live, url, raw)?,
            };
            Ok(ToolResult::ok(paginate(&page, start, max)))
        }),
        exclusive: false,
    }]
}
