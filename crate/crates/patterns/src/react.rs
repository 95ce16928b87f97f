//! ReAct baseline: one agent, one growing transcript, every tool.
//!
//! Action and observation only; the model is not asked for a separate
//! thought before each call.

use std::path::PathBuf;

use agentx_core::{FailureReason, Outcome, Task};
use agentx_llm::{ChatRequest, Llm, Message};
use agentx_mcp::ToolBox;
use serde::{Deserialize, Serialize};

use crate::prompt::load;
use crate::turn::{complete, run_calls};
use crate::{PatternError, PatternOutput};

pub const REACT_AGENT: &str = "react";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactConfig {
    pub max_iterations: u32,
    pub prompt_dir: Option<PathBuf>,
}

impl Default for ReactConfig {
    fn default() -> Self {
        ReactConfig {
            max_iterations: 25,
            prompt_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactPrompts {
    pub system: String,
}

impl ReactPrompts {
    pub fn builtin() -> Self {
        ReactPrompts {
            system: include_str!("../prompts/react/system.txt").into(),
        }
    }

    pub fn load(dir: Option<&std::path::Path>) -> Result<Self, PatternError> {
        Ok(ReactPrompts {
            system: load(dir, "system.txt", &Self::builtin().system)?,
        })
    }
}

pub fn run(
    cfg: &ReactConfig,
    task: &Task,
    llm: &mut Llm,
    tools: &mut ToolBox,
) -> Result<PatternOutput, PatternError> {
    let prompts = ReactPrompts::load(cfg.prompt_dir.as_deref())?;
    let all = tools.descriptors();
    let mut transcript = vec![
        Message::system(prompts.system.trim_end()),
        Message::user(&task.prompt),
    ];
    for _ in 0..cfg.max_iterations {
        let req = ChatRequest::new(llm.model_id(), transcript.clone()).with_tools(all.clone());
        let resp = match complete(llm, REACT_AGENT, "act", req) {
            Ok(r) => r,
            Err(e) => {
                return Ok(PatternOutput::failed(
                    Outcome::failure(FailureReason::Backend, e.to_string()),
                    vec![],
                ))
            }
        };
        if resp.tool_calls.is_empty() {
            return Ok(PatternOutput {
                outcome: Outcome::Success,
                stages: vec![],
                final_answer: Some(resp.content),
            });
        }
        let calls = resp.tool_calls.clone();
        transcript.push(Message::assistant(resp.content, resp.tool_calls));
        let (results, _) = run_calls(tools, &calls, None);
        transcript.extend(results);
    }
    Ok(PatternOutput::failed(
        Outcome::failure(
            FailureReason::ReactLimit,
            format!("no final answer after {} iterations", cfg.max_iterations),
        ),
        vec![],
    ))
}
