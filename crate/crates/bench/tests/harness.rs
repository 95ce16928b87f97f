use std::sync::Arc;

use agentx_bench::export::{
    cells_csv, metrics_csv, render_table, runs_csv, METRICS_COLUMNS, RUNS_COLUMNS,
};
use agentx_bench::{
    run_matrix, write_bundle, BenchOptions, BenchReport, Judge, Matrix, RunStatus, ScriptDir,
    StopRule, TaskSpec,
};
use agentx_core::AppLabel;
use agentx_engine::{ClockKind, EngineConfig, RunMode};
use agentx_llm::ScriptedBackend;
use agentx_patterns::PatternKind;
use rust_decimal::Decimal;

fn cfg(work: &std::path::Path) -> EngineConfig {
    EngineConfig {
        work_root: work.to_path_buf(),
        clock: ClockKind::Logical,
        no_network: true,
        ..EngineConfig::default()
    }
}

fn small(mode: RunMode) -> Matrix {
    Matrix {
        name: "small".into(),
        patterns: vec![PatternKind::Agentx, PatternKind::React],
        tasks: vec![TaskSpec {
            app: AppLabel::StockCorrelation,
            instances: Some(vec![0, 1]),
        }],
        repetitions: 2,
        mode,
        stop_rule: StopRule::FixedRuns,
        max_runs: None,
        scripts: None,
        judge: None,
    }
}

#[test]
fn bundled_matrix_succeeds_offline_with_judge() {
    let work = tempfile::tempdir().unwrap();
    let m = Matrix::bundled();
    let opts = BenchOptions {
        parallel: 4,
        judge: Some((
            Judge::default(),
            Arc::new(ScriptedBackend::new(Matrix::bundled_judge_script())),
        )),
        reports_dir: Some(work.path().join("reports")),
    };
    let report = run_matrix(&m, &cfg(work.path()), &ScriptDir::for_matrix(&m), &opts).unwrap();
    assert_eq!(report.summary.cells, 27);
    assert_eq!(report.summary.total_runs, 135);
    assert_eq!(report.summary.success_rate, 100.0);
    assert!(!report.any_exhausted());
    for c in &report.cells {
        assert_eq!(c.means.judge_total, Some(Decimal::from(82)), "{}", c.cell);
        let walls: Vec<u64> = c.runs.iter().map(|r| r.wall_ms).collect();
        let (lo, hi) = (
            *walls.iter().min().unwrap() as f64,
            *walls.iter().max().unwrap() as f64,
        );
        assert!(lo <= c.means.wall_ms && c.means.wall_ms <= hi);
    }
    assert_eq!(
        std::fs::read_dir(work.path().join("reports"))
            .unwrap()
            .count(),
        135
    );
    let table = render_table(&report);
    assert!(
        table.contains("135 runs, 135 successes (100.0%)"),
        "{table}"
    );
}

#[test]
fn fixed_runs_cardinality_and_parallel_equivalence() {
    let work = tempfile::tempdir().unwrap();
    let m = small(RunMode::LocalMcp);
    let source = ScriptDir::for_matrix(&m);
    let seq = run_matrix(
        &m,
        &cfg(&work.path().join("a")),
        &source,
        &BenchOptions::default(),
    )
    .unwrap();
    let par = run_matrix(
        &m,
        &cfg(&work.path().join("b")),
        &source,
        &BenchOptions {
            parallel: 4,
            ..BenchOptions::default()
        },
    )
    .unwrap();
    assert_eq!(seq.summary.total_runs, 8);
    assert_eq!(seq, par);
}

#[test]
fn missing_scripts_exhaust_the_cell() {
    let work = tempfile::tempdir().unwrap();
    let mut m = small(RunMode::LocalMcp);
    m.stop_rule = StopRule::UntilNSuccesses { n: 2 };
    m.max_runs = Some(3);
    m.scripts = Some(work.path().join("no-scripts"));
    let report = run_matrix(
        &m,
        &cfg(work.path()),
        &ScriptDir::for_matrix(&m),
        &BenchOptions::default(),
    )
    .unwrap();
    assert!(report.any_exhausted());
    assert_eq!(report.summary.exhausted_cells.len(), 4);
    for c in &report.cells {
        assert_eq!(c.total_runs, 3);
        assert_eq!(c.failures.get("error"), Some(&3));
        assert!(c
            .runs
            .iter()
            .all(|r| r.status == RunStatus::Error && r.detail.contains("script")));
    }
    assert!(
        render_table(&report).contains("CellExhausted: agentx-stock_correlation-AAPL-GOOGL-MSFT")
    );
}

#[test]
fn faas_modes_agree_on_outcomes_and_differ_in_memory() {
    let work = tempfile::tempdir().unwrap();
    let run = |mode: RunMode| {
        let m = small(mode);
        run_matrix(
            &m,
            &cfg(&work.path().join(mode.as_str())),
            &ScriptDir::for_matrix(&m),
            &BenchOptions::default(),
        )
        .unwrap()
    };
    let dist = run(RunMode::FaasDistributed);
    let mono = run(RunMode::FaasMonolithic);
    assert_eq!(dist.summary.success_rate, 100.0);
    assert_eq!(mono.summary.success_rate, 100.0);
    assert!(dist.summary.faas_cost_usd > Decimal::ZERO);
    let mb_ms = |r: &BenchReport| -> u64 {
        r.cells
            .iter()
            .flat_map(|c| &c.runs)
            .map(|r| r.faas_mb_ms)
            .sum()
    };
    assert_ne!(mb_ms(&dist), mb_ms(&mono));
    for (a, b) in dist.cells.iter().zip(&mono.cells) {
        let statuses =
            |c: &agentx_bench::CellReport| c.runs.iter().map(|r| r.status).collect::<Vec<_>>();
        assert_eq!(statuses(a), statuses(b));
    }
}

#[test]
fn bundle_round_trips() {
    let work = tempfile::tempdir().unwrap();
    let m = small(RunMode::LocalMcp);
    let report = run_matrix(
        &m,
        &cfg(work.path()),
        &ScriptDir::for_matrix(&m),
        &BenchOptions::default(),
    )
    .unwrap();
    let out = work.path().join("out");
    let files = write_bundle(&report, &out).unwrap();
    assert_eq!(files.len(), 4);
    let back =
        BenchReport::from_json(&std::fs::read_to_string(out.join("bench.json")).unwrap()).unwrap();
    assert_eq!(back, report);

    let runs = runs_csv(&report).unwrap();
    let mut r = csv::Reader::from_reader(runs.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        RUNS_COLUMNS.to_vec()
    );
    assert_eq!(r.records().count(), 8);
    let metrics = metrics_csv(&report).unwrap();
    let mut r = csv::Reader::from_reader(metrics.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        METRICS_COLUMNS.to_vec()
    );
    assert_eq!(r.records().count(), 8 * 8);
    assert_eq!(cells_csv(&report).unwrap().lines().count(), 5);
    assert!(BenchReport::from_json("{\"schema\": \"trace.v1\"}").is_err());
}
