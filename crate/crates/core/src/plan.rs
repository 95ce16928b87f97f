use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::tool::ToolDescriptor;

/// A `(server, tool)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ToolRef {
    pub server: String,
    pub name: String,
}

impl ToolRef {
    pub fn new(server: impl Into<String>, name: impl Into<String>) -> Self {
        ToolRef {
            server: server.into(),
            name: name.into(),
        }
    }

    pub fn of(d: &ToolDescriptor) -> Self {
        ToolRef::new(&d.server, &d.name)
    }
}

impl std::fmt::Display for ToolRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.server, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub description: String,
    pub tool: Option<ToolRef>,
    #[serde(default)]
    pub args: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub stage_index: usize,
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("plan has no steps")]
    Empty,
    #[error("step {step} references unknown tool `{tool}`")]
    UnknownTool { step: usize, tool: String },
    #[error("step {step} passes `{arg}`, which `{tool}` does not accept")]
    UnknownArg {
        step: usize,
        tool: String,
        arg: String,
    },
    #[error("malformed plan: {0}")]
    Malformed(String),
}

impl Plan {
    /// Checks the plan against the tools that are actually available.
    pub fn validate(&self, tools: &[ToolDescriptor]) -> Result<(), PlanError> {
        if self.steps.is_empty() {
            return Err(PlanError::Empty);
        }
        for (i, step) in self.steps.iter().enumerate() {
            let Some(tref) = &step.tool else { continue };
            let d = tools
                .iter()
                .find(|d| d.server == tref.server && d.name == tref.name)
                .ok_or_else(|| PlanError::UnknownTool {
                    step: i,
                    tool: tref.to_string(),
                })?;
            if let Some(arg) = step.args.keys().find(|a| d.param_spec(a).is_none()) {
                return Err(PlanError::UnknownArg {
                    step: i,
                    tool: tref.to_string(),
                    arg: arg.clone(),
                });
            }
        }
        Ok(())
    }

    /// Distinct tools referenced by the plan, in first-use order.
    pub fn referenced_tools(&self) -> Vec<ToolRef> {
        let mut out: Vec<ToolRef> = Vec::new();
        for t in self.steps.iter().filter_map(|s| s.tool.as_ref()) {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        out
    }

    /// Human-readable numbered rendering embedded in executor prompts.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            s.push_str(&format!("{}. {}", i + 1, step.description));
            if let Some(t) = &step.tool {
                let args = serde_json::to_string(&step.args).unwrap_or_default();
                s.push_str(&format!(" [tool: {} args: {}]", t.name, args));
            }
            s.push('\n');
        }
        s
    }
}
