//! Benchmark harness: matrices of runs, stop rules, per-cell means, the
//! rubric judge and `bench.v1` / CSV exports.

pub mod export;
pub mod harness;
pub mod judge;
pub mod matrix;
pub mod metrics;

pub use harness::{
    run_matrix, write_bundle, BenchOptions, BenchReport, BenchSummary, CellMeans, CellReport,
    RunRow, RunStatus, ScriptDir, ScriptSource, BENCH_SCHEMA,
};
pub use judge::{weighted_total, Attribute, Judge, JudgeError, JudgeScore, Rubric};
pub use matrix::{Cell, JudgeSpec, Matrix, StopRule, TaskSpec};
pub use metrics::success_rate;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("matrix: {0}")]
    Matrix(String),
    #[error("script: {0}")]
    Script(String),
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Engine(#[from] agentx_engine::EngineError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("io: {0}")]
    Io(String),
}
