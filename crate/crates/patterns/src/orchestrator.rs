//! Orchestrator-delegate baseline: a lead agent keeps a fact sheet and plan,
//! and routes instructions to one delegate per tool server.
//!
//! Delegates report back with a reflection only. A failed delegation costs
//! one recovery: the fact sheet and plan are regenerated.

use std::collections::BTreeMap;
use std::path::PathBuf;

use agentx_core::{
    FailureReason, FieldType, Outcome, StructuredOutput, StructuredSchema, Task, ToolDescriptor,
    ToolRef,
};
use agentx_llm::{ChatRequest, Llm, Message};
use agentx_mcp::ToolBox;
use serde::{Deserialize, Serialize};

use crate::prompt::{fill, load};
use crate::turn::{ask_structured, complete, no_check, run_calls, Halt};
use crate::{PatternError, PatternOutput};

pub const ORCHESTRATOR_AGENT: &str = "orchestrator";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorConfig {
    /// Tool calls one delegation may make before it must report back.
    pub delegate_tool_calls: u32,
    pub recovery_cap: u32,
    /// Delegations before the run is abandoned.
    pub max_turns: u32,
    pub schema_retries: u32,
    pub prompt_dir: Option<PathBuf>,
    /// Per-server overrides of the built-in delegate descriptions.
    pub delegates: BTreeMap<String, String>,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            delegate_tool_calls: 8,
            recovery_cap: 3,
            max_turns: 20,
            schema_retries: 2,
            prompt_dir: None,
            delegates: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrchestratorPrompts {
    pub facts: String,
    pub plan: String,
    pub select: String,
    pub facts_update: String,
    pub replan: String,
    pub final_answer: String,
    pub delegate: String,
    pub delegate_reflection: String,
    pub descriptions: BTreeMap<String, String>,
}

impl OrchestratorPrompts {
    pub fn builtin() -> Self {
        OrchestratorPrompts {
            facts: include_str!("../prompts/orchestrator/facts.txt").into(),
            plan: include_str!("../prompts/orchestrator/plan.txt").into(),
            select: include_str!("../prompts/orchestrator/select.txt").into(),
            facts_update: include_str!("../prompts/orchestrator/facts_update.txt").into(),
            replan: include_str!("../prompts/orchestrator/replan.txt").into(),
            final_answer: include_str!("../prompts/orchestrator/final.txt").into(),
            delegate: include_str!("../prompts/orchestrator/delegate.txt").into(),
            delegate_reflection: include_str!("../prompts/orchestrator/delegate_reflection.txt")
                .into(),
            descriptions: serde_json::from_str(include_str!(
                "../prompts/orchestrator/delegates.json"
            ))
            .expect("bundled delegates.json is valid"),
        }
    }

    pub fn load(dir: Option<&std::path::Path>) -> Result<Self, PatternError> {
        let b = Self::builtin();
        let descriptions = match dir.map(|d| d.join("delegates.json")).filter(|p| p.exists()) {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| PatternError::Template {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                serde_json::from_str(&text).map_err(|e| PatternError::Template {
                    path,
                    reason: e.to_string(),
                })?
            }
            None => b.descriptions,
        };
        Ok(OrchestratorPrompts {
            facts: load(dir, "facts.txt", &b.facts)?,
            plan: load(dir, "plan.txt", &b.plan)?,
            select: load(dir, "select.txt", &b.select)?,
            facts_update: load(dir, "facts_update.txt", &b.facts_update)?,
            replan: load(dir, "replan.txt", &b.replan)?,
            final_answer: load(dir, "final.txt", &b.final_answer)?,
            delegate: load(dir, "delegate.txt", &b.delegate)?,
            delegate_reflection: load(dir, "delegate_reflection.txt", &b.delegate_reflection)?,
            descriptions,
        })
    }
}

/// Four-part fact sheet kept by the orchestrator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSheet {
    pub given: Vec<String>,
    pub to_look_up: Vec<String>,
    pub to_derive: Vec<String>,
    pub educated_guesses: Vec<String>,
}

impl FactSheet {
    pub fn schema() -> StructuredSchema {
        StructuredSchema::new("fact_sheet")
            .field("given", FieldType::StringList, "facts given in the request")
            .field("to_look_up", FieldType::StringList, "facts to look up")
            .field(
                "to_derive",
                FieldType::StringList,
                "facts to derive through computation or reasoning",
            )
            .field(
                "educated_guesses",
                FieldType::StringList,
                "educated guesses",
            )
    }

    pub fn from_output(o: &StructuredOutput) -> Self {
        let get = |k: &str| o.list(k).unwrap_or_default().to_vec();
        FactSheet {
            given: get("given"),
            to_look_up: get("to_look_up"),
            to_derive: get("to_derive"),
            educated_guesses: get("educated_guesses"),
        }
    }
}

pub fn plan_schema() -> StructuredSchema {
    StructuredSchema::new("team_plan").field(
        "steps",
        FieldType::StringList,
        "plan steps, each naming an agent",
    )
}

pub fn select_schema() -> StructuredSchema {
    StructuredSchema::new("next_speaker")
        .field(
            "is_complete",
            FieldType::Boolean,
            "whether the request is fully satisfied",
        )
        .field(
            "next_agent",
            FieldType::String,
            "name of the agent that acts next",
        )
        .field(
            "instruction",
            FieldType::String,
            "instruction for that agent",
        )
}

pub fn delegate_reflection_schema() -> StructuredSchema {
    StructuredSchema::new("delegate_report")
        .field(
            "success",
            FieldType::Boolean,
            "whether the instruction was carried out",
        )
        .field("reflection", FieldType::String, "what was done and found")
}

/// One agent per tool server.
#[derive(Debug, Clone, PartialEq)]
pub struct Delegate {
    pub name: String,
    pub server: String,
    pub description: String,
    pub tools: Vec<ToolDescriptor>,
}

impl Delegate {
    pub fn agent_name(server: &str) -> String {
        format!("{server}_agent")
    }
}

/// Groups `tools` by server, in first-seen order. Servers without a
/// configured description get one listing their tools.
pub fn build_delegates(
    tools: &[ToolDescriptor],
    descriptions: &BTreeMap<String, String>,
) -> Vec<Delegate> {
    let mut out: Vec<Delegate> = Vec::new();
    for t in tools {
        match out.iter_mut().find(|d| d.server == t.server) {
            Some(d) => d.tools.push(t.clone()),
            None => out.push(Delegate {
                name: Delegate::agent_name(&t.server),
                server: t.server.clone(),
                description: String::new(),
                tools: vec![t.clone()],
            }),
        }
    }
    for d in &mut out {
        d.description = match descriptions.get(&d.server).filter(|s| !s.trim().is_empty()) {
            Some(s) => s.clone(),
            None => {
                let names: Vec<&str> = d.tools.iter().map(|t| t.name.as_str()).collect();
                format!("Agent with the tools {}.", names.join(", "))
            }
        };
    }
    out
}

fn render_team(delegates: &[Delegate]) -> String {
    delegates
        .iter()
        .map(|d| format!("- {}: {}\n", d.name, d.description))
        .collect()
}

struct Run<'a> {
    cfg: &'a OrchestratorConfig,
    prompts: OrchestratorPrompts,
    llm: &'a mut Llm,
    tools: &'a mut ToolBox,
    delegates: Vec<Delegate>,
}

pub fn run(
    cfg: &OrchestratorConfig,
    task: &Task,
    llm: &mut Llm,
    tools: &mut ToolBox,
) -> Result<PatternOutput, PatternError> {
    let mut prompts = OrchestratorPrompts::load(cfg.prompt_dir.as_deref())?;
    prompts.descriptions.extend(cfg.delegates.clone());
    let delegates = build_delegates(&tools.descriptors(), &prompts.descriptions);
    if delegates.is_empty() {
        return Err(PatternError::NoDelegates);
    }
    let mut run = Run {
        cfg,
        prompts,
        llm,
        tools,
        delegates,
    };
    let outcome = match run.lead(task) {
        Ok(out) => out,
        Err(h) => PatternOutput::failed(
            h.outcome(FailureReason::SchemaFailure, "orchestrator"),
            vec![],
        ),
    };
    Ok(outcome)
}

impl Run<'_> {
    fn ask(
        &mut self,
        label: &str,
        ledger: &mut Vec<Message>,
        schema: &StructuredSchema,
    ) -> Result<StructuredOutput, Halt> {
        ask_structured(
            self.llm,
            ORCHESTRATOR_AGENT,
            label,
            ledger,
            schema,
            self.cfg.schema_retries,
            no_check,
        )
    }

    fn lead(&mut self, task: &Task) -> Result<PatternOutput, Halt> {
        let team = render_team(&self.delegates);
        let names: Vec<String> = self.delegates.iter().map(|d| d.name.clone()).collect();
        let mut ledger = vec![Message::user(fill(
            &self.prompts.facts,
            &[("task", &task.prompt)],
        ))];
        self.ask("facts", &mut ledger, &FactSheet::schema())?;
        ledger.push(Message::user(fill(&self.prompts.plan, &[("team", &team)])));
        self.ask("plan", &mut ledger, &plan_schema())?;

        let select = fill(&self.prompts.select, &[("agents", &names.join(", "))]);
        let mut recoveries = 0;
        for _ in 0..self.cfg.max_turns {
            ledger.push(Message::user(select.trim_end()));
            let pick = self.ask("select", &mut ledger, &select_schema())?;
            if pick.bool("is_complete").unwrap_or(false) {
                ledger.push(Message::user(self.prompts.final_answer.trim_end()));
                let req = ChatRequest::new(self.llm.model_id(), ledger.clone());
                let resp = complete(self.llm, ORCHESTRATOR_AGENT, "final", req)?;
                return Ok(PatternOutput {
                    outcome: Outcome::Success,
                    stages: vec![],
                    final_answer: Some(resp.content),
                });
            }
            let agent = pick
                .str("next_agent")
                .unwrap_or_default()
                .trim()
                .to_string();
            let instruction = pick.str("instruction").unwrap_or_default().to_string();
            let (success, reflection) = match self
                .delegates
                .iter()
                .position(|d| d.name == agent || d.server == agent)
            {
                Some(i) => self.delegate(i, &instruction)?,
                None => (
                    false,
                    format!("There is no agent named `{agent}` on the team."),
                ),
            };
            let status = if success { "succeeded" } else { "failed" };
            ledger.push(Message::user(format!("{agent} {status}: {reflection}")));
            if !success {
                recoveries += 1;
                if recoveries > self.cfg.recovery_cap {
                    return Ok(PatternOutput::failed(
                        Outcome::failure(
                            FailureReason::RecoveryLimit,
                            format!("more than {} recoveries", self.cfg.recovery_cap),
                        ),
                        vec![],
                    ));
                }
                ledger.push(Message::user(self.prompts.facts_update.trim_end()));
                self.ask("facts_update", &mut ledger, &FactSheet::schema())?;
                ledger.push(Message::user(fill(
                    &self.prompts.replan,
                    &[("team", &team)],
                )));
                self.ask("replan", &mut ledger, &plan_schema())?;
            }
        }
        Ok(PatternOutput::failed(
            Outcome::failure(
                FailureReason::RecoveryLimit,
                format!(
                    "request not complete after {} delegations",
                    self.cfg.max_turns
                ),
            ),
            vec![],
        ))
    }

    /// Runs delegate `i` on `instruction`; returns its self-reported
    /// success and reflection.
    fn delegate(&mut self, i: usize, instruction: &str) -> Result<(bool, String), Halt> {
        let d = self.delegates[i].clone();
        let allowed: Vec<ToolRef> = d.tools.iter().map(ToolRef::of).collect();
        let system = fill(
            &self.prompts.delegate,
            &[("name", &d.name), ("description", &d.description)],
        );
        let mut transcript = vec![
            Message::system(system.trim_end()),
            Message::user(instruction),
        ];
        let mut calls_made = 0;
        while calls_made < self.cfg.delegate_tool_calls {
            let req = ChatRequest::new(self.llm.model_id(), transcript.clone())
                .with_tools(d.tools.clone());
            let resp = complete(self.llm, &d.name, "act", req)?;
            let calls = resp.tool_calls.clone();
            transcript.push(Message::assistant(resp.content, resp.tool_calls));
            if calls.is_empty() {
                break;
            }
            let budget = (self.cfg.delegate_tool_calls - calls_made) as usize;
            let (mut results, _) = run_calls(
                self.tools,
                &calls[..calls.len().min(budget)],
                Some(&allowed),
            );
            for c in calls.iter().skip(budget) {
                results.push(Message::tool(&c.id, "Error: tool call budget exhausted"));
            }
            calls_made += calls.len().min(budget) as u32;
            transcript.extend(results);
        }
        transcript.push(Message::user(self.prompts.delegate_reflection.trim_end()));
        let out = ask_structured(
            self.llm,
            &d.name,
            "reflect",
            &mut transcript,
            &delegate_reflection_schema(),
            self.cfg.schema_retries,
            no_check,
        )?;
        Ok((
            out.bool("success").unwrap_or(false),
            out.str("reflection").unwrap_or_default().to_string(),
        ))
    }
}
