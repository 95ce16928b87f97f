//! The built-in MCP servers used by the three benchmark applications.
//!
//! Every server has a fixture mode (the default, fully offline and
//! deterministic) and a live mode that talks to the real upstream service.
//! [`build_registry`] assembles all of them into one [`Registry`] that can
//! be hosted locally or deployed through `agentx-faas`.

pub mod arxiv;
pub mod code;
pub mod fetch;
pub mod files;
pub mod fixtures;
mod place;
pub mod rag;
pub mod s3;
pub mod search;
pub mod stocks;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use agentx_core::ToolDescriptor;
use agentx_faas::BlobStore;
use agentx_mcp::{Handler, Registry};
use serde::{Deserialize, Serialize};

pub use place::{confine, Location};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToolError {
    #[error("no fixture for {0}")]
    NoFixture(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("upstream error: {0}")]
    Upstream(String),
    #[error("path escapes the workspace: {0}")]
    PathEscape(String),
    #[error("write denied: {0}")]
    WriteDenied(String),
    #[error("no file present in that path: {0}")]
    NoSuchDocument(String),
    #[error("unknown ticker {0}")]
    UnknownTicker(String),
    #[error("execution timed out after {0} s")]
    Timeout(u64),
    #[error("output exceeded {0} bytes")]
    OutputTooLarge(usize),
    #[error("no interpreter: {0}")]
    NoInterpreter(String),
    #[error("invalid argument {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ToolError {
    fn from(e: std::io::Error) -> Self {
        ToolError::Io(e.to_string())
    }
}

impl From<agentx_faas::BlobError> for ToolError {
    fn from(e: agentx_faas::BlobError) -> Self {
        match e {
            agentx_faas::BlobError::NoSuchKey(k) => ToolError::NotFound(k),
            agentx_faas::BlobError::InvalidUri(u) => ToolError::InvalidArgument(format!("uri {u}")),
            agentx_faas::BlobError::Io(m) => ToolError::Io(m),
        }
    }
}

/// Which hosting the descriptors are written for. Local servers carry the
/// usage hints and read local paths; FaaS servers read S3 URIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Local,
    Faas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Fixture,
    Live,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveConfig {
    pub serper_url: String,
    pub serper_api_key: Option<String>,
    pub arxiv_url: String,
    pub yahoo_url: String,
    pub timeout_s: u64,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            serper_url: "https://google.serper.dev/search".into(),
            serper_api_key: None,
            arxiv_url: "https://export.arxiv.org/api/query".into(),
            yahoo_url: "https://query1.finance.yahoo.com/v8/finance/chart".into(),
            timeout_s: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToolpackConfig {
    pub mode: Mode,
    pub profile: Profile,
    pub fixtures: PathBuf,
    pub blobs: Arc<BlobStore>,
    /// Qualified tool name -> hint appended to its description.
    pub hints: BTreeMap<String, String>,
    pub rag: rag::RagConfig,
    pub code: code::CodeConfig,
    pub live: LiveConfig,
    /// Whether `load_article_to_context` returns the full text or refuses.
    pub load_full_articles: bool,
}

impl ToolpackConfig {
    /// Fixture mode over the shipped corpus with the profile's default hints.
    pub fn new(profile: Profile, blob_root: impl Into<PathBuf>) -> Self {
        ToolpackConfig {
            mode: Mode::Fixture,
            profile,
            fixtures: default_fixture_root(),
            blobs: Arc::new(BlobStore::new(blob_root)),
            hints: default_hints(profile),
            rag: rag::RagConfig::default(),
            code: code::CodeConfig::default(),
            live: LiveConfig::default(),
            load_full_articles: true,
        }
    }

    fn hinted(&self, d: ToolDescriptor) -> ToolDescriptor {
        match self.hints.get(&d.qualified_name()) {
            Some(h) => d.with_hint(h),
            None => d,
        }
    }
}

pub fn default_fixture_root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

pub fn default_hints(profile: Profile) -> BTreeMap<String, String> {
    let text = match profile {
        Profile::Local => include_str!("../hints/local.json"),
        Profile::Faas => include_str!("../hints/faas.json"),
    };
    serde_json::from_str(text).expect("bundled hints are valid")
}

/// Server names in the order they are registered.
pub const SERVERS: [&str; 8] = [
    "code_executor",
    "rag",
    "yfinance",
    "serper",
    "arxiv",
    "fetch",
    "filesystem",
    "s3",
];

pub(crate) struct Tool {
    pub descriptor: ToolDescriptor,
    pub handler: Handler,
    pub exclusive: bool,
}

/// All eight servers.
pub fn build_registry(cfg: &ToolpackConfig) -> Registry {
    let mut reg = Registry::new();
    let tools = [
        code::tools(cfg),
        rag::tools(cfg),
        stocks::tools(cfg),
        search::tools(cfg),
        arxiv::tools(cfg),
        fetch::tools(cfg),
        files::tools(cfg),
        s3::tools(cfg),
    ];
    for t in tools.into_iter().flatten() {
        reg.register_tool(cfg.hinted(t.descriptor), t.handler, t.exclusive)
            .expect("tool names are unique");
    }
    reg
}

pub(crate) fn str_arg<'a>(
    args: &'a serde_json::Map<String, serde_json::Value>,
    name: &str,
) -> Result<&'a str, ToolError> {
    args.get(name)
        .and_then(|v| v.as_str())
        .ok_or_else(|| ToolError::InvalidArgument(format!("{name}: expected a string")))
}

pub(crate) fn opt_u64(
    args: &serde_json::Map<String, serde_json::Value>,
    name: &str,
    default: u64,
) -> Result<u64, ToolError> {
    match args.get(name) {
        None | Some(serde_json::Value::Null) => Ok(default),
        Some(v) => v.as_u64().ok_or_else(|| {
            ToolError::InvalidArgument(format!("{name}: expected a non-negative integer"))
        }),
    }
}

pub(crate) fn http_agent(timeout_s: u64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(std::time::Duration::from_secs(timeout_s)))
        .http_status_as_error(false)
        .build()
        .into()
}

/// Wraps a typed handler so its errors become `is_error` results.
pub(crate) fn handler<F>(f: F) -> Handler
where
    F: Fn(
            &agentx_mcp::CallContext,
            &serde_json::Map<String, serde_json::Value>,
        ) -> Result<agentx_mcp::ToolResult, ToolError>
        + Send
        + Sync
        + 'static,
{
    Arc::new(move |ctx, args| f(ctx, args).map_err(|e| e.to_string()))
}
