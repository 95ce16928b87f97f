//! `serper` server: web search.

use agentx_core::{net, Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::fixtures::{self, FixtureSet};
use crate::{handler, opt_u64, str_arg, LiveConfig, Mode, Tool, ToolError, ToolpackConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub link: String,
    pub snippet: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchIndexEntry {
    pub query: String,
    pub results: String,
}

/// Canned results for `query`: exact normalized match first, then the
/// indexed query sharing the most content words.
pub fn fixture_results(fx: &FixtureSet, query: &str) -> Result<Vec<SearchResult>, ToolError> {
    let index: Vec<SearchIndexEntry> = fx.read_json("serper", "index.json")?;
    let wanted = fixtures::normalize(query);
    let hit = index
        .iter()
        .position(|e| fixtures::normalize(&e.query) == wanted)
        .or_else(|| fixtures::best_overlap(query, index.iter().map(|e| e.query.as_str())))
        .ok_or_else(|| ToolError::NoFixture(format!("search query {query:?}")))?;
    fx.read_json("serper", &index[hit].results)
}

/// The tool's text payload for a result list.
pub fn render(results: &[SearchResult]) -> String {
    let organic: Vec<_> = results
        .iter()
        .enumerate()
        .map(|(i, r)| json!({"position": i + 1, "title": r.title, "link": r.link, "snippet": r.snippet}))
        .collect();
    serde_json::to_string_pretty(&json!({"organic": organic})).expect("serializes")
}

fn live_results(live: &LiveConfig, query: &str, n: usize) -> Result<Vec<SearchResult>, ToolError> {
    net::guard(&live.serper_url).map_err(|e| ToolError::Upstream(e.to_string()))?;
    let key = live
        .serper_api_key
        .as_deref()
        .ok_or_else(|| ToolError::Upstream("no Serper API key configured".into()))?;
    let mut resp = crate::http_agent(live.timeout_s)
        .post(&live.serper_url)
        .header("X-API-KEY", key)
        .send_json(json!({"q": query, "num": n}))
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    if !resp.status().is_success() {
        return Err(ToolError::Upstream(format!(
            "serper returned {}",
            resp.status()
        )));
    }
    let body: serde_json::Value = resp
        .body_mut()
        .read_json()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    Ok(body["organic"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|r| SearchResult {
                    title: r["title"].as_str().unwrap_or_default().into(),
                    link: r["link"].as_str().unwrap_or_default().into(),
                    snippet: r["snippet"].as_str().unwrap_or_default().into(),
                })
                .filter(|r| !r.snippet.is_empty())
                .collect()
        })
        .unwrap_or_default())
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let fx = FixtureSet::new(&cfg.fixtures);
    let mode = cfg.mode;
    let live = cfg.live.clone();
    vec![Tool {
        descriptor: ToolDescriptor::new(
            "serper",
            "google_search",
            "Search the web with Google. Returns the title, URL and a short snippet of each result.",
            Origin::Community,
        )
        .param(ParamSpec::required("query", ParamType::String, "The search query."))
        .param(
            ParamSpec::optional("num_results", ParamType::Integer, "Number of results to return (1-10, default 10).")
                .range(1, 10),
        ),
        handler: handler(move |_ctx, args| {
            let query = str_arg(args, "query")?;
            let n = opt_u64(args, "num_results", 10)?.clamp(1, 10) as usize;
            let mut results = match mode {
                Mode::Fixture => fixture_results(&fx, query)?,
                Mode::Live => live_results(&live, query, n)?,
            };
            results.truncate(n);
            Ok(ToolResult::ok(render(&results)))
        }),
        exclusive: false,
    }]
}
