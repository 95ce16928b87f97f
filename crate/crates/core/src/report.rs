//! Run reports (`trace.v1`).

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::stage::{StageStatus, StageSummary};
use crate::task::Task;
use crate::trace::TraceEvent;

pub const TRACE_SCHEMA: &str = "trace.v1";

/// Why a run failed, at the granularity patterns can tell apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    ArtifactMissing,
    SchemaFailure,
    StageGeneration,
    PlanRejected,
    ToolErrorLoop,
    ReactLimit,
    RecoveryLimit,
    Backend,
}

/// Benchmark failure taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCategory {
    ArtifactMissing,
    SchemaFailure,
    IterationLimit,
    ToolErrorLoop,
    RecoveryLimit,
}

impl FailureCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCategory::ArtifactMissing => "artifact_missing",
            FailureCategory::SchemaFailure => "schema_failure",
            FailureCategory::IterationLimit => "iteration_limit",
            FailureCategory::ToolErrorLoop => "tool_error_loop",
            FailureCategory::RecoveryLimit => "recovery_limit",
        }
    }
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::ArtifactMissing => "artifact_missing",
            FailureReason::SchemaFailure => "schema_failure",
            FailureReason::StageGeneration => "stage_generation",
            FailureReason::PlanRejected => "plan_rejected",
            FailureReason::ToolErrorLoop => "tool_error_loop",
            FailureReason::ReactLimit => "react_limit",
            FailureReason::RecoveryLimit => "recovery_limit",
            FailureReason::Backend => "backend",
        }
    }

    pub fn category(self) -> FailureCategory {
        match self {
            FailureReason::ArtifactMissing => FailureCategory::ArtifactMissing,
            FailureReason::SchemaFailure
            | FailureReason::StageGeneration
            | FailureReason::PlanRejected
            | FailureReason::Backend => FailureCategory::SchemaFailure,
            FailureReason::ToolErrorLoop => FailureCategory::ToolErrorLoop,
            FailureReason::ReactLimit => FailureCategory::IterationLimit,
            FailureReason::RecoveryLimit => FailureCategory::RecoveryLimit,
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure {
        reason: FailureReason,
        detail: String,
    },
}

impl Outcome {
    pub fn failure(reason: FailureReason, detail: impl Into<String>) -> Self {
        Outcome::Failure {
            reason,
            detail: detail.into(),
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }

    pub fn reason(&self) -> Option<FailureReason> {
        match self {
            Outcome::Success => None,
            Outcome::Failure { reason, .. } => Some(*reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    pub description: String,
    pub status: StageStatus,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<StageSummary>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub latency_llm_ms: u64,
    pub latency_tool_ms: u64,
    pub latency_framework_ms: u64,
    /// Set when llm + tool time exceeded wall-clock time and the framework
    /// bucket was clamped to zero.
    #[serde(default)]
    pub latency_anomaly: bool,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub llm_cost_usd: Decimal,
    pub faas_cost_usd: Decimal,
}

/// Splits a run's wall-clock time into llm, tool and framework buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencySplit {
    pub llm_ms: u64,
    pub tool_ms: u64,
    pub framework_ms: u64,
    pub clamped: bool,
}

pub fn decompose_latency(trace: &[TraceEvent], wall_ms: u64) -> LatencySplit {
    let llm_ms: u64 = trace
        .iter()
        .filter(|e| e.actor.is_agent())
        .map(TraceEvent::duration_ms)
        .sum();
    let tool_ms: u64 = trace
        .iter()
        .filter(|e| e.actor.is_tool())
        .map(TraceEvent::duration_ms)
        .sum();
    let busy = llm_ms + tool_ms;
    LatencySplit {
        llm_ms,
        tool_ms,
        framework_ms: wall_ms.saturating_sub(busy),
        clamped: busy > wall_ms,
    }
}

impl Totals {
    /// Token and latency totals from the trace. Costs are left at zero for
    /// the caller, which owns the price tables.
    pub fn from_trace(trace: &[TraceEvent], wall_ms: u64) -> Self {
        let split = decompose_latency(trace, wall_ms);
        Totals {
            latency_llm_ms: split.llm_ms,
            latency_tool_ms: split.tool_ms,
            latency_framework_ms: split.framework_ms,
            latency_anomaly: split.clamped,
            tokens_in: trace.iter().map(|e| e.tokens_in).sum(),
            tokens_out: trace.iter().map(|e| e.tokens_out).sum(),
            llm_cost_usd: Decimal::ZERO,
            faas_cost_usd: Decimal::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub run_id: String,
    pub task: Task,
    pub pattern: String,
    pub mode: String,
    pub outcome: Outcome,
    pub stages: Vec<StageRecord>,
    pub started_ms: u64,
    pub ended_ms: u64,
    pub totals: Totals,
    pub artifacts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_answer: Option<String>,
    pub trace: Vec<TraceEvent>,
}

impl RunReport {
    pub fn wall_ms(&self) -> u64 {
        self.ended_ms.saturating_sub(self.started_ms)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Actor;

    fn ev(actor: Actor, start: u64, end: u64, tin: u64) -> TraceEvent {
        TraceEvent {
            seq: 0,
            run_id: "r".into(),
            actor,
            stage: None,
            label: None,
            start_ms: start,
            end_ms: end,
            tokens_in: tin,
            tokens_out: 1,
            payload_digest: String::new(),
        }
    }

    #[test]
    fn empty_trace_is_all_framework() {
        let s = decompose_latency(&[], 100);
        assert_eq!(
            (s.llm_ms, s.tool_ms, s.framework_ms, s.clamped),
            (0, 0, 100, false)
        );
    }

    #[test]
    fn hand_sum() {
        let t = [
            ev(Actor::agent("a"), 0, 40, 5),
            ev(Actor::tool("s", "t"), 40, 70, 0),
        ];
        let s = decompose_latency(&t, 100);
        assert_eq!((s.llm_ms, s.tool_ms, s.framework_ms), (40, 30, 30));
    }

    #[test]
    fn overlap_is_clamped_and_flagged() {
        let t = [
            ev(Actor::agent("a"), 0, 60, 5),
            ev(Actor::tool("s", "t"), 10, 55, 0),
        ];
        let s = decompose_latency(&t, 100);
        assert_eq!(s.framework_ms, 0);
        assert!(s.clamped);
    }

    #[test]
    fn totals_sum_tokens() {
        let t = [
            ev(Actor::agent("a"), 0, 1, 7),
            ev(Actor::agent("b"), 1, 2, 3),
        ];
        let tot = Totals::from_trace(&t, 5);
        assert_eq!((tot.tokens_in, tot.tokens_out), (10, 2));
    }

    #[test]
    fn taxonomy_mapping() {
        assert_eq!(
            FailureReason::ReactLimit.category(),
            FailureCategory::IterationLimit
        );
        assert_eq!(
            serde_json::to_value(Outcome::failure(FailureReason::ArtifactMissing, "x")).unwrap()
                ["reason"],
            "artifact_missing"
        );
    }
}
