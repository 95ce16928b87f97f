//! Runs a matrix through the engine and aggregates per-cell results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use agentx_core::{AppLabel, Outcome};
use agentx_engine::golden::{golden_root, GoldenCase};
use agentx_engine::{Engine, EngineConfig, RunOutput};
use agentx_faas::{BlobStore, BlobUri};
use agentx_llm::{ChatBackend, Script, ScriptedBackend};
use rayon::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::judge::{Judge, JudgeScore, Rubric};
use crate::matrix::{Cell, Matrix, StopRule};
use crate::metrics::{mean, mean_decimal, success_rate};
use crate::BenchError;

pub const BENCH_SCHEMA: &str = "bench.v1";

/// Supplies the chat backend for each run of a cell.
pub trait ScriptSource: Sync {
    /// `attempt` counts from 1 within the cell.
    fn backend(&self, cell: &Cell, attempt: u32) -> Result<Arc<dyn ChatBackend>, BenchError>;
}

/// Scripts laid out like the engine's golden directory.
#[derive(Debug, Clone)]
pub struct ScriptDir {
    pub root: PathBuf,
    pub profile: agentx_toolpack::Profile,
}

impl ScriptDir {
    pub fn for_matrix(m: &Matrix) -> Self {
        ScriptDir {
            root: m.scripts.clone().unwrap_or_else(golden_root),
            profile: m.mode.profile(),
        }
    }

    pub fn path(&self, cell: &Cell) -> PathBuf {
        GoldenCase {
            pattern: cell.pattern,
            app: cell.app,
            instance: cell.instance,
            profile: self.profile,
        }
        .path(&self.root)
    }
}

impl ScriptSource for ScriptDir {
    fn backend(&self, cell: &Cell, _attempt: u32) -> Result<Arc<dyn ChatBackend>, BenchError> {
        let script =
            Script::load(&self.path(cell)).map_err(|e| BenchError::Script(e.to_string()))?;
        Ok(Arc::new(ScriptedBackend::new(script)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    Failure,
    /// The run could not start (missing script, bad setup).
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Success => "success",
            RunStatus::Failure => "failure",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_id: String,
    pub attempt: u32,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Failure taxonomy bucket.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    pub wall_ms: u64,
    pub latency_llm_ms: u64,
    pub latency_tool_ms: u64,
    pub latency_framework_ms: u64,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub llm_cost_usd: Decimal,
    pub faas_cost_usd: Decimal,
    pub invocations: u64,
    /// Σ memory_mb × duration_ms over the run's invocations.
    pub faas_mb_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<JudgeScore>,
}

impl RunRow {
    fn errored(run_id: String, attempt: u32, detail: String) -> Self {
        RunRow {
            run_id,
            attempt,
            status: RunStatus::Error,
            reason: Some("error".into()),
            category: None,
            detail,
            wall_ms: 0,
            latency_llm_ms: 0,
            latency_tool_ms: 0,
            latency_framework_ms: 0,
            tokens_in: 0,
            tokens_out: 0,
            llm_cost_usd: Decimal::ZERO,
            faas_cost_usd: Decimal::ZERO,
            invocations: 0,
            faas_mb_ms: 0,
            judge: None,
        }
    }

    fn from_output(attempt: u32, out: &RunOutput) -> Self {
        let r = &out.report;
        let t = &r.totals;
        let (status, reason, category, detail) = match &r.outcome {
            Outcome::Success => (RunStatus::Success, None, None, String::new()),
            Outcome::Failure { reason, detail } => (
                RunStatus::Failure,
                Some(reason.as_str().to_string()),
                Some(reason.category().as_str().to_string()),
                detail.clone(),
            ),
        };
        RunRow {
            run_id: r.run_id.clone(),
            attempt,
            status,
            reason,
            category,
            detail,
            wall_ms: r.wall_ms(),
            latency_llm_ms: t.latency_llm_ms,
            latency_tool_ms: t.latency_tool_ms,
            latency_framework_ms: t.latency_framework_ms,
            tokens_in: t.tokens_in,
            tokens_out: t.tokens_out,
            llm_cost_usd: t.llm_cost_usd,
            faas_cost_usd: t.faas_cost_usd,
            invocations: out.meter.len() as u64,
            faas_mb_ms: out
                .meter
                .iter()
                .map(|m| u64::from(m.memory_mb) * m.duration_ms)
                .sum(),
            judge: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeans {
    pub wall_ms: f64,
    pub latency_llm_ms: f64,
    pub latency_tool_ms: f64,
    pub latency_framework_ms: f64,
    pub tokens_in: f64,
    pub tokens_out: f64,
    pub llm_cost_usd: Decimal,
    pub faas_cost_usd: Decimal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_total: Option<Decimal>,
}

impl CellMeans {
    /// Means over the runs that produced a report.
    fn of(runs: &[RunRow]) -> Self {
        let ran: Vec<&RunRow> = runs
            .iter()
            .filter(|r| r.status != RunStatus::Error)
            .collect();
        let judged: Vec<Decimal> = ran
            .iter()
            .filter_map(|r| r.judge.as_ref().map(|j| j.total))
            .collect();
        CellMeans {
            wall_ms: mean(ran.iter().map(|r| r.wall_ms)),
            latency_llm_ms: mean(ran.iter().map(|r| r.latency_llm_ms)),
            latency_tool_ms: mean(ran.iter().map(|r| r.latency_tool_ms)),
            latency_framework_ms: mean(ran.iter().map(|r| r.latency_framework_ms)),
            tokens_in: mean(ran.iter().map(|r| r.tokens_in)),
            tokens_out: mean(ran.iter().map(|r| r.tokens_out)),
            llm_cost_usd: mean_decimal(ran.iter().map(|r| r.llm_cost_usd)),
            faas_cost_usd: mean_decimal(ran.iter().map(|r| r.faas_cost_usd)),
            judge_total: (!judged.is_empty()).then(|| mean_decimal(judged)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: String,
    pub pattern: String,
    pub task_id: String,
    pub app: AppLabel,
    pub instance: String,
    pub mode: String,
    pub runs: Vec<RunRow>,
    pub successes: u32,
    pub total_runs: u32,
    pub success_rate: f64,
    /// The stop rule's success target was not met within the run budget.
    pub exhausted: bool,
    pub means: CellMeans,
    /// Runs per failure category (`error` for runs that never started).
    pub failures: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub cells: usize,
    pub total_runs: u32,
    pub successes: u32,
    pub success_rate: f64,
    pub exhausted_cells: Vec<String>,
    pub llm_cost_usd: Decimal,
    pub faas_cost_usd: Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub matrix: Matrix,
    pub cells: Vec<CellReport>,
    pub summary: BenchSummary,
}

impl BenchReport {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let r: BenchReport =
            serde_json::from_str(text).map_err(|e| BenchError::Report(e.to_string()))?;
        if r.schema != BENCH_SCHEMA {
            return Err(BenchError::Report(format!(
                "expected schema {BENCH_SCHEMA}, found {}",
                r.schema
            )));
        }
        Ok(r)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn any_exhausted(&self) -> bool {
        self.cells.iter().any(|c| c.exhausted)
    }

    fn summarize(matrix: Matrix, cells: Vec<CellReport>) -> Self {
        let total_runs = cells.iter().map(|c| c.total_runs).sum();
        let successes = cells.iter().map(|c| c.successes).sum();
        let all_runs = || cells.iter().flat_map(|c| &c.runs);
        let summary = BenchSummary {
            cells: cells.len(),
            total_runs,
            successes,
            success_rate: success_rate(successes, total_runs),
            exhausted_cells: cells
                .iter()
                .filter(|c| c.exhausted)
                .map(|c| c.cell.clone())
                .collect(),
            llm_cost_usd: all_runs()
                .map(|r| r.llm_cost_usd)
                .sum::<Decimal>()
                .normalize(),
            faas_cost_usd: all_runs()
                .map(|r| r.faas_cost_usd)
                .sum::<Decimal>()
                .normalize(),
        };
        BenchReport {
            schema: BENCH_SCHEMA.to_string(),
            matrix,
            cells,
            summary,
        }
    }
}

/// How a matrix is executed.
#[derive(Default)]
pub struct BenchOptions {
    /// Cells run concurrently; 0 and 1 both mean sequential.
    pub parallel: usize,
    /// Scores the output of every successful run when set.
    pub judge: Option<(Judge, Arc<dyn ChatBackend>)>,
    /// Where each run's `trace.v1` report is written, if anywhere.
    pub reports_dir: Option<PathBuf>,
}

/// Runs every cell of `matrix` under its stop rule.
pub fn run_matrix(
    matrix: &Matrix,
    cfg: &EngineConfig,
    scripts: &dyn ScriptSource,
    opts: &BenchOptions,
) -> Result<BenchReport, BenchError> {
    matrix.validate()?;
    let engine = Engine::new(EngineConfig {
        mode: matrix.mode,
        ..cfg.clone()
    })?;
    if let Some(dir) = &opts.reports_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    }
    let cells = matrix.cells();
    let run_cell = |cell: &Cell| run_cell(matrix, &engine, cell, scripts, opts);
    let reports: Vec<Result<CellReport, BenchError>> = if opts.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel)
            .build()
            .map_err(|e| BenchError::Io(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    } else {
        cells.iter().map(run_cell).collect()
    };
    let cells = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport::summarize(matrix.clone(), cells))
}

fn run_cell(
    matrix: &Matrix,
    engine: &Engine,
    cell: &Cell,
    scripts: &dyn ScriptSource,
    opts: &BenchOptions,
) -> Result<CellReport, BenchError> {
    let budget = matrix.run_budget();
    let target = match matrix.stop_rule {
        StopRule::FixedRuns => None,
        StopRule::UntilNSuccesses { n } => Some(n),
    };
    let mut runs = Vec::new();
    let mut successes = 0;
    for attempt in 1..=budget {
        if target.is_some_and(|n| successes >= n) {
            break;
        }
        let run_id = format!("{}-{}-{attempt:02}", matrix.name, cell.id());
        let row = match scripts.backend(cell, attempt) {
            Err(e) => RunRow::errored(run_id, attempt, e.to_string()),
            Ok(backend) => match engine.run(cell.pattern, &cell.task, backend.as_ref(), &run_id) {
                Err(e) => RunRow::errored(run_id, attempt, e.to_string()),
                Ok(out) => {
                    let mut row = RunRow::from_output(attempt, &out);
                    if let Some(dir) = &opts.reports_dir {
                        let path = dir.join(format!("run-{run_id}.json"));
                        std::fs::write(&path, out.report.to_json_pretty())
                            .map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
                    }
                    if let (RunStatus::Success, Some((judge, backend))) = (row.status, &opts.judge)
                    {
                        let text = judged_text(&out);
                        let rubric = match cell.app {
                            AppLabel::StockCorrelation => Rubric::stock(),
                            _ => Rubric::summary(),
                        };
                        row.judge = Some(judge.score(
                            &cell.task.prompt,
                            &text,
                            &rubric,
                            backend.as_ref(),
                        )?);
                    }
                    row
                }
            },
        };
        if row.status == RunStatus::Success {
            successes += 1;
        }
        runs.push(row);
    }
    let total_runs = runs.len() as u32;
    let mut failures = BTreeMap::new();
    for r in &runs {
        match (r.status, &r.category) {
            (RunStatus::Success, _) => {}
            (RunStatus::Error, _) => *failures.entry("error".to_string()).or_insert(0) += 1,
            (RunStatus::Failure, Some(c)) => *failures.entry(c.clone()).or_insert(0) += 1,
            (RunStatus::Failure, None) => {}
        }
    }
    Ok(CellReport {
        cell: cell.id(),
        pattern: cell.pattern.as_str().to_string(),
        task_id: cell.task.id.clone(),
        app: cell.app,
        instance: cell.task.instance_label.clone(),
        mode: matrix.mode.as_str().to_string(),
        exhausted: target.is_some_and(|n| successes < n),
        success_rate: success_rate(successes, total_runs),
        means: CellMeans::of(&runs),
        successes,
        total_runs,
        runs,
        failures,
    })
}

/// The text a judge grades: the first text artifact, else the final answer.
fn judged_text(out: &RunOutput) -> String {
    let blobs = BlobStore::new(&out.blob_root);
    for uri in &out.report.artifacts {
        if !(uri.ends_with(".txt") || uri.ends_with(".md")) {
            continue;
        }
        let bytes = match uri.strip_prefix("file:") {
            Some(rel) => std::fs::read(out.workspace.join(rel)).ok(),
            None => uri.parse::<BlobUri>().ok().and_then(|u| blobs.get(&u).ok()),
        };
        if let Some(b) = bytes {
            return String::from_utf8_lossy(&b).into_owned();
        }
    }
    out.report.final_answer.clone().unwrap_or_default()
}

/// Writes `bench.json` and the CSV exports into `dir`.
pub fn write_bundle(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let json = dir.join("bench.json");
    std::fs::write(&json, report.to_json_pretty())
        .map_err(|e| BenchError::Io(format!("{}: {e}", json.display())))?;
    written.push(json);
    for (name, text) in [
        ("cells.csv", crate::export::cells_csv(report)?),
        ("runs.csv", crate::export::runs_csv(report)?),
        ("metrics.csv", crate::export::metrics_csv(report)?),
    ] {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
        written.push(p);
    }
    Ok(written)
}
