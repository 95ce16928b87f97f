//! Domain model shared by every agentx crate.
//!
//! The types here are plain values: tasks, stages, plans, tool descriptors,
//! structured-output schemas and the run trace that every metric is derived
//! from. Nothing in this crate performs I/O except the optional network
//! guard, which only flips a process-wide switch.

pub mod ids;
pub mod net;
pub mod plan;
pub mod report;
pub mod schema;
pub mod stage;
pub mod task;
pub mod tool;
pub mod trace;

pub use ids::{new_run_id, RunIdGen};
pub use plan::{Plan, PlanError, PlanStep, ToolRef};
pub use report::{
    decompose_latency, FailureCategory, FailureReason, LatencySplit, Outcome, RunReport,
    StageRecord, Totals, TRACE_SCHEMA,
};
pub use schema::{
    parse_structured_output, FieldSpec, FieldType, FieldValue, SchemaViolation, StructuredOutput,
    StructuredSchema,
};
pub use stage::{Stage, StageStatus, StageSummary, TransitionError, DEFAULT_SUMMARY_CAP};
pub use task::{AppLabel, Task};
pub use tool::{Origin, ParamSpec, ParamType, ToolDescriptor};
pub use trace::{digest_json, Actor, Clock, LogicalClock, Span, SystemClock, TraceEvent, Tracer};

/// Currency values are decimal so cost sums reconcile exactly.
pub use rust_decimal::Decimal;
