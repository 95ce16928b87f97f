//! Agentic patterns over a traced [`Llm`] and an MCP [`ToolBox`].
//!
//! [`agentx`] is the stage → plan → execute pipeline. [`react`] and
//! [`orchestrator`] are the comparison baselines. Every pattern returns a
//! [`PatternOutput`]; building the run report and checking artifacts is the
//! engine's job.

pub mod agentx;
pub mod orchestrator;
pub mod prompt;
pub mod react;
mod turn;

use std::path::PathBuf;

use agentx_core::{Outcome, StageRecord, Task};
use agentx_llm::Llm;
use agentx_mcp::ToolBox;
use serde::{Deserialize, Serialize};

pub use agentx::{AgentxConfig, AgentxPrompts, StageContext};
pub use orchestrator::{Delegate, FactSheet, OrchestratorConfig, OrchestratorPrompts};
pub use react::{ReactConfig, ReactPrompts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Agentx,
    React,
    Orchestrator,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [
        PatternKind::Agentx,
        PatternKind::React,
        PatternKind::Orchestrator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Agentx => "agentx",
            PatternKind::React => "react",
            PatternKind::Orchestrator => "orchestrator",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', ' '], "_")
            .as_str()
        {
            "agentx" => Some(PatternKind::Agentx),
            "react" => Some(PatternKind::React),
            "orchestrator" | "magentic_one" | "magentic" => Some(PatternKind::Orchestrator),
            _ => None,
        }
    }
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The `patterns` block of the engine config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    pub agentx: AgentxConfig,
    pub react: ReactConfig,
    pub orchestrator: OrchestratorConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternOutput {
    pub outcome: Outcome,
    pub stages: Vec<StageRecord>,
    pub final_answer: Option<String>,
}

impl PatternOutput {
    pub(crate) fn failed(outcome: Outcome, stages: Vec<StageRecord>) -> Self {
        PatternOutput {
            outcome,
            stages,
            final_answer: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("orchestrator needs at least one delegate, but no tool servers are connected")]
    NoDelegates,
    #[error("cannot read prompt template {path}: {reason}")]
    Template { path: PathBuf, reason: String },
}

/// Runs `kind` on `task`. Run-level failures are reported in the output's
/// outcome; `Err` is reserved for configuration problems.
pub fn run_pattern(
    kind: PatternKind,
    cfg: &PatternConfig,
    task: &Task,
    llm: &mut Llm,
    tools: &mut ToolBox,
) -> Result<PatternOutput, PatternError> {
    match kind {
        PatternKind::Agentx => agentx::run(&cfg.agentx, task, llm, tools),
        PatternKind::React => react::run(&cfg.react, task, llm, tools),
        PatternKind::Orchestrator => orchestrator::run(&cfg.orchestrator, task, llm, tools),
    }
}
