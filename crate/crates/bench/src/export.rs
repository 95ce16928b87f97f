//! CSV exports and the plain-text summary table.
//!
//! The column lists below are frozen; new columns are only ever appended.
//!
//! * `cells.csv`: one row per cell with its means and failure counts.
//! * `runs.csv`: one row per run.
//! * `metrics.csv`: long format, one row per (run, metric), for plotting
//!   stacked latency and token bars.

use agentx_core::{RunReport, TRACE_SCHEMA};
use rust_decimal::Decimal;

use crate::harness::{BenchReport, CellReport, RunRow};
use crate::BenchError;

pub const CELLS_COLUMNS: [&str; 21] = [
    "matrix",
    "cell",
    "pattern",
    "task_id",
    "app",
    "instance",
    "mode",
    "total_runs",
    "successes",
    "success_rate",
    "exhausted",
    "mean_wall_ms",
    "mean_latency_llm_ms",
    "mean_latency_tool_ms",
    "mean_latency_framework_ms",
    "mean_tokens_in",
    "mean_tokens_out",
    "mean_llm_cost_usd",
    "mean_faas_cost_usd",
    "mean_judge_total",
    "failures",
];

pub const RUNS_COLUMNS: [&str; 24] = [
    "matrix",
    "cell",
    "pattern",
    "task_id",
    "app",
    "instance",
    "mode",
    "attempt",
    "run_id",
    "status",
    "reason",
    "category",
    "wall_ms",
    "latency_llm_ms",
    "latency_tool_ms",
    "latency_framework_ms",
    "tokens_in",
    "tokens_out",
    "llm_cost_usd",
    "faas_cost_usd",
    "invocations",
    "faas_mb_ms",
    "judge_total",
    "judge_partial",
];

pub const METRICS_COLUMNS: [&str; 11] = [
    "matrix", "cell", "pattern", "task_id", "app", "instance", "mode", "attempt", "run_id",
    "metric", "value",
];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, BenchError> {
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Io(e.to_string())
}

fn cell_key(matrix: &str, c: &CellReport) -> Vec<String> {
    vec![
        matrix.to_string(),
        c.cell.clone(),
        c.pattern.clone(),
        c.task_id.clone(),
        c.app.as_str().to_string(),
        c.instance.clone(),
        c.mode.clone(),
    ]
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn cells_csv(report: &BenchReport) -> Result<String, BenchError> {
    let mut w = writer();
    w.write_record(CELLS_COLUMNS).map_err(csv_err)?;
    for c in &report.cells {
        let m = &c.means;
        let failures: Vec<String> = c.failures.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut row = cell_key(&report.matrix.name, c);
        row.extend([
            c.total_runs.to_string(),
            c.successes.to_string(),
            format!("{:.2}", c.success_rate),
            c.exhausted.to_string(),
            format!("{:.1}", m.wall_ms),
            format!("{:.1}", m.latency_llm_ms),
            format!("{:.1}", m.latency_tool_ms),
            format!("{:.1}", m.latency_framework_ms),
            format!("{:.1}", m.tokens_in),
            format!("{:.1}", m.tokens_out),
            m.llm_cost_usd.to_string(),
            m.faas_cost_usd.to_string(),
            opt(m.judge_total),
            failures.join(";"),
        ]);
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

fn run_prefix(matrix: &str, c: &CellReport, r: &RunRow) -> Vec<String> {
    let mut row = cell_key(matrix, c);
    row.extend([r.attempt.to_string(), r.run_id.clone()]);
    row
}

pub fn runs_csv(report: &BenchReport) -> Result<String, BenchError> {
    let mut w = writer();
    w.write_record(RUNS_COLUMNS).map_err(csv_err)?;
    for c in &report.cells {
        for r in &c.runs {
            let mut row = run_prefix(&report.matrix.name, c, r);
            row.extend([
                r.status.as_str().to_string(),
                opt(r.reason.as_ref()),
                opt(r.category.as_ref()),
                r.wall_ms.to_string(),
                r.latency_llm_ms.to_string(),
                r.latency_tool_ms.to_string(),
                r.latency_framework_ms.to_string(),
                r.tokens_in.to_string(),
                r.tokens_out.to_string(),
                r.llm_cost_usd.to_string(),
                r.faas_cost_usd.to_string(),
                r.invocations.to_string(),
                r.faas_mb_ms.to_string(),
                opt(r.judge.as_ref().map(|j| j.total)),
                opt(r.judge.as_ref().map(|j| j.partial)),
            ]);
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    finish(w)
}

pub fn metrics_csv(report: &BenchReport) -> Result<String, BenchError> {
    let mut w = writer();
    w.write_record(METRICS_COLUMNS).map_err(csv_err)?;
    for c in &report.cells {
        for r in &c.runs {
            let mut metrics: Vec<(String, String)> = vec![
                (
                    "success".into(),
                    u8::from(r.status == crate::harness::RunStatus::Success).to_string(),
                ),
                ("latency_llm_ms".into(), r.latency_llm_ms.to_string()),
                ("latency_tool_ms".into(), r.latency_tool_ms.to_string()),
                (
                    "latency_framework_ms".into(),
                    r.latency_framework_ms.to_string(),
                ),
                ("tokens_in".into(), r.tokens_in.to_string()),
                ("tokens_out".into(), r.tokens_out.to_string()),
                ("llm_cost_usd".into(), r.llm_cost_usd.to_string()),
                ("faas_cost_usd".into(), r.faas_cost_usd.to_string()),
            ];
            if let Some(j) = &r.judge {
                metrics.push(("judge_total".into(), j.total.to_string()));
                for a in &j.attributes {
                    metrics.push((format!("judge:{}", a.name), opt(a.score)));
                }
            }
            for (metric, value) in metrics {
                let mut row = run_prefix(&report.matrix.name, c, r);
                row.extend([metric, value]);
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    finish(w)
}

const TABLE_HEADER: [(&str, usize); 12] = [
    ("pattern", 12),
    ("task", 46),
    ("runs", 5),
    ("success%", 9),
    ("llm_ms", 9),
    ("tool_ms", 9),
    ("fw_ms", 8),
    ("tokens_in", 10),
    ("tokens_out", 10),
    ("llm_usd", 12),
    ("faas_usd", 14),
    ("judge", 6),
];

fn table_line(cols: &[String]) -> String {
    let mut line = String::new();
    for (i, ((_, width), text)) in TABLE_HEADER.iter().zip(cols).enumerate() {
        if i == 0 || i == 1 {
            line.push_str(&format!("{text:<width$}"));
        } else {
            line.push_str(&format!("{text:>width$}"));
        }
        line.push(' ');
    }
    line.trim_end().to_string()
}

fn header() -> String {
    table_line(
        &TABLE_HEADER
            .iter()
            .map(|(h, _)| h.to_string())
            .collect::<Vec<_>>(),
    )
}

fn usd(d: Decimal) -> String {
    d.round_dp(8).normalize().to_string()
}

/// Per-cell summary table; an empty report renders the header only.
pub fn render_table(report: &BenchReport) -> String {
    let mut out = header();
    out.push('\n');
    for c in &report.cells {
        let m = &c.means;
        let mut task = c.task_id.clone();
        if c.exhausted {
            task.push_str(" [exhausted]");
        }
        out.push_str(&table_line(&[
            c.pattern.clone(),
            task,
            c.total_runs.to_string(),
            format!("{:.1}", c.success_rate),
            format!("{:.0}", m.latency_llm_ms),
            format!("{:.0}", m.latency_tool_ms),
            format!("{:.0}", m.latency_framework_ms),
            format!("{:.0}", m.tokens_in),
            format!("{:.0}", m.tokens_out),
            usd(m.llm_cost_usd),
            usd(m.faas_cost_usd),
            m.judge_total
                .map(|j| format!("{:.1}", j))
                .unwrap_or_else(|| "-".into()),
        ]));
        out.push('\n');
    }
    if !report.cells.is_empty() {
        let s = &report.summary;
        out.push_str(&format!(
            "\n{} cells, {} runs, {} successes ({:.1}%), llm ${}, faas ${}\n",
            s.cells,
            s.total_runs,
            s.successes,
            s.success_rate,
            usd(s.llm_cost_usd),
            usd(s.faas_cost_usd)
        ));
        for c in &s.exhausted_cells {
            out.push_str(&format!("CellExhausted: {c}\n"));
        }
    }
    out
}

/// The same table for a single `trace.v1` run report.
pub fn render_run(report: &RunReport) -> String {
    let t = &report.totals;
    let ok = report.outcome.is_success();
    format!(
        "{}\n{}\n",
        header(),
        table_line(&[
            report.pattern.clone(),
            report.task.id.clone(),
            "1".into(),
            if ok { "100.0" } else { "0.0" }.into(),
            t.latency_llm_ms.to_string(),
            t.latency_tool_ms.to_string(),
            t.latency_framework_ms.to_string(),
            t.tokens_in.to_string(),
            t.tokens_out.to_string(),
            usd(t.llm_cost_usd),
            usd(t.faas_cost_usd),
            "-".into(),
        ])
    )
}

/// A run report as one `runs.csv` style row set.
pub fn run_csv(report: &RunReport) -> Result<String, BenchError> {
    let mut w = writer();
    w.write_record(RUNS_COLUMNS).map_err(csv_err)?;
    let t = &report.totals;
    let (status, reason, category) = match report.outcome.reason() {
        None => ("success", String::new(), String::new()),
        Some(r) => (
            "failure",
            r.as_str().to_string(),
            r.category().as_str().to_string(),
        ),
    };
    w.write_record([
        String::new(),
        format!("{}-{}", report.pattern, report.task.id),
        report.pattern.clone(),
        report.task.id.clone(),
        report.task.app_label.as_str().to_string(),
        report.task.instance_label.clone(),
        report.mode.clone(),
        "1".into(),
        report.run_id.clone(),
        status.into(),
        reason,
        category,
        report.wall_ms().to_string(),
        t.latency_llm_ms.to_string(),
        t.latency_tool_ms.to_string(),
        t.latency_framework_ms.to_string(),
        t.tokens_in.to_string(),
        t.tokens_out.to_string(),
        t.llm_cost_usd.to_string(),
        t.faas_cost_usd.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ])
    .map_err(csv_err)?;
    finish(w)
}

/// Whether `text` looks like a `trace.v1` run report rather than a
/// `bench.v1` bundle.
pub fn is_run_report(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| {
            v.get("schema")
                .and_then(|s| s.as_str())
                .map(|s| s == TRACE_SCHEMA)
        })
        .unwrap_or(false)
}
