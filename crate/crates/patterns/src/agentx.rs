//! AgentX: stage generation, then per stage a planner and an executor.
//!
//! Only stage summaries cross stage boundaries. The executor of a stage sees
//! just the tools its plan names.

use std::collections::BTreeMap;
use std::path::PathBuf;

use agentx_core::{
    FailureReason, FieldType, Outcome, Plan, PlanError, PlanStep, Stage, StageRecord, StageStatus,
    StageSummary, StructuredOutput, StructuredSchema, Task, ToolDescriptor, ToolRef,
    DEFAULT_SUMMARY_CAP,
};
use agentx_llm::{ChatRequest, Llm, Message};
use agentx_mcp::ToolBox;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::prompt::{fill, load, render_tools};
use crate::turn::{ask_structured, complete, no_check, run_calls, violation, Halt};
use crate::{PatternError, PatternOutput};

pub const STAGE_AGENT: &str = "stage_generator";
pub const PLANNER_AGENT: &str = "planner";
pub const EXECUTOR_AGENT: &str = "executor";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentxConfig {
    /// Reflection rounds per stage before the stage fails.
    pub max_attempts: u32,
    /// Tool-calling inferences per attempt.
    pub max_action_rounds: u32,
    pub replans: u32,
    pub schema_retries: u32,
    pub summary_cap: usize,
    /// Directory whose template files override the built-in prompts.
    pub prompt_dir: Option<PathBuf>,
}

impl Default for AgentxConfig {
    fn default() -> Self {
        AgentxConfig {
            max_attempts: 5,
            max_action_rounds: 10,
            replans: 1,
            schema_retries: 2,
            summary_cap: DEFAULT_SUMMARY_CAP,
            prompt_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentxPrompts {
    pub stage: String,
    pub planner: String,
    pub executor: String,
    pub reflection: String,
    pub retry: String,
}

impl AgentxPrompts {
    pub fn builtin() -> Self {
        AgentxPrompts {
            stage: include_str!("../prompts/agentx/stage.txt").into(),
            planner: include_str!("../prompts/agentx/planner.txt").into(),
            executor: include_str!("../prompts/agentx/executor.txt").into(),
            reflection: include_str!("../prompts/agentx/reflection.txt").into(),
            retry: include_str!("../prompts/agentx/retry.txt").into(),
        }
    }

    pub fn load(dir: Option<&std::path::Path>) -> Result<Self, PatternError> {
        let b = Self::builtin();
        Ok(AgentxPrompts {
            stage: load(dir, "stage.txt", &b.stage)?,
            planner: load(dir, "planner.txt", &b.planner)?,
            executor: load(dir, "executor.txt", &b.executor)?,
            reflection: load(dir, "reflection.txt", &b.reflection)?,
            retry: load(dir, "retry.txt", &b.retry)?,
        })
    }
}

pub fn stage_schema() -> StructuredSchema {
    StructuredSchema::new("stage_generation").field(
        "sub_tasks",
        FieldType::StringList,
        "list of sub tasks, in execution order",
    )
}

pub fn plan_schema() -> StructuredSchema {
    StructuredSchema::new("stage_plan")
        .field(
            "step_descriptions",
            FieldType::StringList,
            "what each step does",
        )
        .field(
            "step_tools",
            FieldType::StringList,
            "tool name for each step, or an empty string when the step needs no tool",
        )
        .field(
            "step_args",
            FieldType::StringList,
            "tool arguments for each step as a JSON object string",
        )
}

pub fn reflection_schema() -> StructuredSchema {
    StructuredSchema::new("stage_reflection")
        .field(
            "success",
            FieldType::Boolean,
            "whether the stage was completed successfully",
        )
        .field(
            "results",
            FieldType::String,
            "the relevant results of the stage",
        )
}

/// The view of the stage list that one stage's planner and executor get.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageContext<'a> {
    pub original_task: &'a str,
    pub completed: Vec<(&'a Stage, &'a StageSummary)>,
    pub current: &'a Stage,
    pub future: Vec<&'a Stage>,
}

impl<'a> StageContext<'a> {
    /// Splits `stages` around index `k`; `summaries` holds one entry per
    /// stage before `k`.
    pub fn partition(
        task: &'a str,
        stages: &'a [Stage],
        summaries: &'a [StageSummary],
        k: usize,
    ) -> Self {
        StageContext {
            original_task: task,
            completed: stages[..k].iter().zip(summaries).collect(),
            current: &stages[k],
            future: stages[k + 1..].iter().collect(),
        }
    }

    pub fn render_completed(&self) -> String {
        if self.completed.is_empty() {
            return "(none)".into();
        }
        self.completed
            .iter()
            .map(|(s, sum)| {
                format!(
                    "Stage {}: {}\nResults: {}\n",
                    s.index + 1,
                    s.description,
                    sum.results
                )
            })
            .collect()
    }

    pub fn render_current(&self) -> String {
        format!(
            "Stage {}: {}",
            self.current.index + 1,
            self.current.description
        )
    }

    pub fn render_future(&self) -> String {
        if self.future.is_empty() {
            return "(none)".into();
        }
        self.future
            .iter()
            .map(|s| format!("Stage {}: {}\n", s.index + 1, s.description))
            .collect()
    }
}

/// Turns the planner's parallel lists into a [`Plan`]. Tool names may be
/// bare or `server.tool`; an empty name or `none` means no tool.
pub fn plan_from_output(
    out: &StructuredOutput,
    stage_index: usize,
    tools: &[ToolDescriptor],
) -> Result<Plan, PlanError> {
    let descs = out.list("step_descriptions").unwrap_or_default();
    let names = out.list("step_tools").unwrap_or_default();
    let args = out.list("step_args").unwrap_or_default();
    if names.len() != descs.len() || args.len() != descs.len() {
        return Err(PlanError::Malformed(format!(
            "{} descriptions, {} tools and {} argument sets",
            descs.len(),
            names.len(),
            args.len()
        )));
    }
    let mut steps = Vec::with_capacity(descs.len());
    for (i, ((d, name), raw_args)) in descs.iter().zip(names).zip(args).enumerate() {
        let name = name.trim();
        let tool = if name.is_empty() || name.eq_ignore_ascii_case("none") {
            None
        } else {
            let d = tools
                .iter()
                .find(|t| t.name == name || t.qualified_name() == name)
                .ok_or_else(|| PlanError::UnknownTool {
                    step: i,
                    tool: name.to_string(),
                })?;
            Some(ToolRef::of(d))
        };
        let args = if tool.is_none() {
            BTreeMap::new()
        } else {
            parse_args(raw_args)
                .map_err(|e| PlanError::Malformed(format!("step {i} arguments: {e}")))?
        };
        steps.push(PlanStep {
            description: d.clone(),
            tool,
            args,
        });
    }
    let plan = Plan { stage_index, steps };
    plan.validate(tools)?;
    Ok(plan)
}

fn parse_args(raw: &str) -> Result<BTreeMap<String, Value>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(BTreeMap::new());
    }
    match serde_json::from_str::<Value>(raw) {
        Ok(Value::Object(m)) => Ok(m.into_iter().collect()),
        Ok(_) => Err("expected a JSON object".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Descriptors for exactly the tools `plan` references.
pub fn filter_tools(plan: &Plan, tools: &[ToolDescriptor]) -> Vec<ToolDescriptor> {
    plan.referenced_tools()
        .iter()
        .filter_map(|r| tools.iter().find(|d| ToolRef::of(d) == *r).cloned())
        .collect()
}

struct Run<'a> {
    cfg: &'a AgentxConfig,
    prompts: AgentxPrompts,
    llm: &'a mut Llm,
    tools: &'a mut ToolBox,
    all_tools: Vec<ToolDescriptor>,
}

pub fn run(
    cfg: &AgentxConfig,
    task: &Task,
    llm: &mut Llm,
    tools: &mut ToolBox,
) -> Result<PatternOutput, PatternError> {
    let prompts = AgentxPrompts::load(cfg.prompt_dir.as_deref())?;
    let all_tools = tools.descriptors();
    let mut run = Run {
        cfg,
        prompts,
        llm,
        tools,
        all_tools,
    };
    let out = run.pipeline(task);
    run.llm.tracer().set_stage(None);
    Ok(out)
}

impl Run<'_> {
    fn pipeline(&mut self, task: &Task) -> PatternOutput {
        self.llm.tracer().set_stage(None);
        let mut stages = match self.generate_stages(&task.prompt) {
            Ok(s) => s,
            Err(h) => {
                return PatternOutput::failed(
                    h.outcome(FailureReason::StageGeneration, "stage generation"),
                    vec![],
                )
            }
        };
        let mut summaries: Vec<StageSummary> = Vec::new();
        let mut records: Vec<StageRecord> = Vec::new();

        for k in 0..stages.len() {
            self.llm.tracer().set_stage(Some(k));
            stages[k]
                .transition(StageStatus::Active)
                .expect("stage starts pending");
            let result = {
                let ctx = StageContext::partition(&task.prompt, &stages, &summaries, k);
                self.run_stage(&ctx)
            };
            let (summary, attempts, failure) = match result {
                Ok((summary, attempts)) => {
                    let failure = (!summary.success).then(|| {
                        Outcome::failure(
                            FailureReason::ToolErrorLoop,
                            format!("stage {} not completed after {attempts} attempts", k + 1),
                        )
                    });
                    (Some(summary), attempts, failure)
                }
                Err(outcome) => (None, 0, Some(outcome)),
            };
            let status = if failure.is_some() {
                StageStatus::Failed
            } else {
                StageStatus::Done
            };
            stages[k].transition(status).expect("active stage finishes");
            records.push(StageRecord {
                index: k,
                description: stages[k].description.clone(),
                status,
                attempts,
                summary: summary.clone(),
            });
            if let Some(outcome) = failure {
                records.extend(stages[k + 1..].iter().map(|s| StageRecord {
                    index: s.index,
                    description: s.description.clone(),
                    status: s.status,
                    attempts: 0,
                    summary: None,
                }));
                return PatternOutput::failed(outcome, records);
            }
            summaries.push(summary.expect("successful stage has a summary"));
        }
        PatternOutput {
            outcome: Outcome::Success,
            final_answer: summaries.last().map(|s| s.results.clone()),
            stages: records,
        }
    }

    fn generate_stages(&mut self, task: &str) -> Result<Vec<Stage>, Halt> {
        let system = fill(
            &self.prompts.stage,
            &[("tools", &render_tools(&self.all_tools))],
        );
        let mut transcript = vec![Message::system(system), Message::user(task)];
        let out = ask_structured(
            self.llm,
            STAGE_AGENT,
            "stages",
            &mut transcript,
            &stage_schema(),
            self.cfg.schema_retries,
            |o| {
                let items = o.list("sub_tasks").unwrap_or_default();
                if items.iter().all(|s| s.trim().is_empty()) {
                    return Err(violation("sub_tasks", "at least one sub-task is required"));
                }
                Ok(())
            },
        )?;
        let descriptions = out
            .list("sub_tasks")
            .unwrap_or_default()
            .iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        Ok(Stage::from_descriptions(descriptions))
    }

    fn run_stage(&mut self, ctx: &StageContext<'_>) -> Result<(StageSummary, u32), Outcome> {
        let (plan, filtered) = self.plan_stage(ctx)?;
        self.execute_stage(ctx, &plan, &filtered)
            .map_err(|h| h.outcome(FailureReason::SchemaFailure, "executor reflection"))
    }

    /// One planner inference, plus up to `replans` more when the plan names
    /// unknown tools or is otherwise invalid.
    fn plan_stage(
        &mut self,
        ctx: &StageContext<'_>,
    ) -> Result<(Plan, Vec<ToolDescriptor>), Outcome> {
        let system = fill(
            &self.prompts.planner,
            &[
                ("task", ctx.original_task),
                ("completed", &ctx.render_completed()),
                ("current", &ctx.render_current()),
                ("future", &ctx.render_future()),
                ("tools", &render_tools(&self.all_tools)),
            ],
        );
        let mut transcript = vec![
            Message::system(system),
            Message::user(format!("Write the plan for {}.", ctx.render_current())),
        ];
        let mut replans_left = self.cfg.replans;
        loop {
            let out = ask_structured(
                self.llm,
                PLANNER_AGENT,
                "plan",
                &mut transcript,
                &plan_schema(),
                self.cfg.schema_retries,
                no_check,
            )
            .map_err(|h| h.outcome(FailureReason::SchemaFailure, "planner"))?;
            match plan_from_output(&out, ctx.current.index, &self.all_tools) {
                Ok(plan) => {
                    let filtered = filter_tools(&plan, &self.all_tools);
                    return Ok((plan, filtered));
                }
                Err(e) if replans_left > 0 => {
                    replans_left -= 1;
                    transcript.push(Message::user(format!(
                        "The plan was rejected: {e}. Write a corrected plan that uses only the available tools."
                    )));
                }
                Err(e) => {
                    return Err(Outcome::failure(
                        FailureReason::PlanRejected,
                        format!("stage {}: {e}", ctx.current.index + 1),
                    ))
                }
            }
        }
    }

    /// Act/reflect attempts until a reflection reports success or the
    /// attempt budget runs out.
    fn execute_stage(
        &mut self,
        ctx: &StageContext<'_>,
        plan: &Plan,
        filtered: &[ToolDescriptor],
    ) -> Result<(StageSummary, u32), Halt> {
        let system = fill(
            &self.prompts.executor,
            &[
                ("task", ctx.original_task),
                ("completed", &ctx.render_completed()),
                ("current", &ctx.render_current()),
                ("plan", &plan.render()),
            ],
        );
        let allowed = plan.referenced_tools();
        let mut transcript = vec![
            Message::system(system),
            Message::user("Start executing the plan."),
        ];
        let mut attempts = 0;
        loop {
            attempts += 1;
            if !filtered.is_empty() {
                for _ in 0..self.cfg.max_action_rounds {
                    let req = ChatRequest::new(self.llm.model_id(), transcript.clone())
                        .with_tools(filtered.to_vec());
                    let resp = complete(self.llm, EXECUTOR_AGENT, "act", req)?;
                    let calls = resp.tool_calls.clone();
                    transcript.push(Message::assistant(resp.content, resp.tool_calls));
                    if calls.is_empty() {
                        break;
                    }
                    let (results, _) = run_calls(self.tools, &calls, Some(&allowed));
                    transcript.extend(results);
                }
            }
            transcript.push(Message::user(self.prompts.reflection.trim_end()));
            let out = ask_structured(
                self.llm,
                EXECUTOR_AGENT,
                "reflect",
                &mut transcript,
                &reflection_schema(),
                self.cfg.schema_retries,
                no_check,
            )?;
            let success = out.bool("success").unwrap_or(false);
            if success || attempts >= self.cfg.max_attempts {
                let results = out.str("results").unwrap_or_default();
                return Ok((
                    StageSummary::new(ctx.current.index, results, success, self.cfg.summary_cap),
                    attempts,
                ));
            }
            transcript.push(Message::user(self.prompts.retry.trim_end()));
        }
    }
}
