//! Workflow engine: runs a pattern on a task with the built-in tool
//! servers, hosted locally or behind the FaaS gateway, and turns the
//! result into a [`RunReport`](agentx_core::RunReport).

pub mod apps;
pub mod artifacts;
pub mod config;
pub mod golden;
mod runner;

pub use apps::{artifact_rule, ArtifactRule, FAAS_PREFIX};
pub use config::{ClockKind, ConfigError, EngineConfig, LlmSpec, RunMode, ToolsConfig};
pub use runner::{backend_from_spec, instance_index, Engine, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pattern(#[from] agentx_patterns::PatternError),
    #[error("tool protocol: {0}")]
    Mcp(#[from] agentx_mcp::McpError),
    #[error("faas: {0}")]
    Faas(#[from] agentx_faas::FaasError),
    #[error("llm: {0}")]
    Llm(#[from] agentx_llm::LlmError),
    #[error("invalid run id: {0}")]
    RunId(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Io(e.to_string())
    }
}
