use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use agentx_bench::export::{cells_csv, is_run_report, render_run, render_table, run_csv};
use agentx_bench::{
    run_matrix, write_bundle, BenchError, BenchOptions, BenchReport, Judge, Matrix, ScriptDir,
};
use agentx_core::{AppLabel, RunReport, Task};
use agentx_engine::{
    apps, backend_from_spec, ClockKind, Engine, EngineConfig, EngineError, LlmSpec, RunMode,
};
use agentx_faas::{Deployment, FaasSessions, FileStore, Gateway, SessionStore};
use agentx_llm::ChatBackend;
use agentx_mcp::SessionIds;
use agentx_patterns::PatternKind;
use agentx_toolpack::{build_registry, Profile};

use crate::args::{BenchArgs, EngineArgs, Format, ReportArgs, RunArgs, ServeArgs};
use crate::CliError;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn engine_err(e: EngineError) -> CliError {
    match e {
        EngineError::Config(c) => CliError::Config(c.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Failed(format!("{}: {e}", path.display()))
}

fn out_dir(a: &EngineArgs, default: &str) -> PathBuf {
    a.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

/// The config file (or defaults with the work root under `out`), with
/// command-line overrides applied and validated.
fn load_config(a: &EngineArgs, out: &Path) -> Result<EngineConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => EngineConfig::load(p).map_err(config_err)?,
        None => EngineConfig {
            work_root: out.join("agentx-work"),
            ..EngineConfig::default()
        },
    };
    if let Some(llm) = &a.llm {
        cfg.llm = llm.clone();
    }
    if let Some(m) = a.mode {
        cfg.mode = m.into();
    }
    cfg.no_network |= a.no_network;
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn backend(spec: &str) -> Result<Box<dyn ChatBackend>, CliError> {
    let spec = LlmSpec::parse(spec).map_err(config_err)?;
    backend_from_spec(&spec).map_err(|e| CliError::Config(e.to_string()))
}

/// A task id or an application prompt picks that application instance,
/// with its artifact requirement; anything else is a custom task.
fn resolve_task(spec: &str, profile: Profile) -> Result<Task, CliError> {
    for app in [
        AppLabel::WebSearch,
        AppLabel::StockCorrelation,
        AppLabel::ResearchReport,
    ] {
        for i in 0..apps::instance_count(app) {
            let t = apps::task(app, i, profile);
            if t.id == spec || t.prompt == spec.trim() {
                return Ok(t);
            }
        }
    }
    Task::new("custom", spec, AppLabel::Custom, "custom")
        .map_err(|_| CliError::Config("--task is empty".into()))
}

pub fn run(a: RunArgs) -> Result<ExitCode, CliError> {
    let out = out_dir(&a.engine, ".");
    let mut cfg = load_config(&a.engine, &out)?;
    if cfg.llm.is_empty() {
        return Err(CliError::Config(
            "no chat backend: pass --llm or set llm in the config".into(),
        ));
    }
    if a.seed.is_some() {
        cfg.clock = ClockKind::Logical;
    }
    let pattern: PatternKind = a.pattern.into();
    let task = resolve_task(&a.task, cfg.mode.profile())?;
    let run_id = match a.seed {
        Some(seed) => format!("{}-{}-seed{seed}", pattern.as_str(), task.id),
        None => format!(
            "{}-{}-{}",
            pattern.as_str(),
            task.id,
            &uuid::Uuid::new_v4().simple().to_string()[..12]
        ),
    };
    let backend = backend(&cfg.llm)?;
    let engine = Engine::new(cfg).map_err(engine_err)?;
    let output = engine
        .run(pattern, &task, backend.as_ref(), &run_id)
        .map_err(engine_err)?;

    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let path = out.join(format!("run-{run_id}.json"));
    std::fs::write(&path, output.report.to_json_pretty()).map_err(io_err(&path))?;
    let report = &output.report;
    match report.outcome.reason() {
        None => {
            println!(
                "run {run_id}: success, {} artifact(s)",
                report.artifacts.len()
            );
            for a in &report.artifacts {
                println!("  {a}");
            }
            println!("report: {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Some(reason) => {
            println!("run {run_id}: failure ({})", reason.as_str());
            println!("report: {}", path.display());
            Ok(ExitCode::from(1))
        }
    }
}

pub fn serve(a: ServeArgs) -> Result<ExitCode, CliError> {
    let out = out_dir(&a.engine, "agentx-serve");
    let mut cfg = load_config(&a.engine, &out)?;
    cfg.mode = match (a.engine.mode, cfg.mode) {
        (Some(_), RunMode::LocalMcp) => {
            return Err(CliError::Config(
                "serve hosts functions; use --mode faas-distributed or faas-monolithic".into(),
            ))
        }
        (None, RunMode::LocalMcp) => RunMode::FaasDistributed,
        (_, m) => m,
    };
    let deploy_mode = cfg.mode.deploy_mode().expect("faas mode");
    let store_path = cfg
        .session_store
        .clone()
        .unwrap_or_else(|| out.join("sessions.json"));
    let meter_path = out.join("meter.json");
    let serve_root = cfg.work_root.join("serve");
    let engine = Engine::new(cfg.clone()).map_err(engine_err)?;

    let store = Arc::new(FileStore::open(&store_path).map_err(config_err)?);
    let registry = Arc::new(build_registry(
        &engine.toolpack_config(&serve_root.join("blobs")),
    ));
    let sessions = Arc::new(FaasSessions::new(
        store.clone() as Arc<dyn SessionStore>,
        serve_root.join("tmp"),
        SessionIds::Random,
    ));
    let deployment = Deployment::deploy(engine.manifests(), deploy_mode, registry, sessions)
        .map_err(config_err)?;
    let gateway = Arc::new(Gateway::new(deployment, cfg.gb_second_rate));

    let shutdown =
        Shutdown::install().map_err(|e| CliError::Failed(format!("signal handler: {e}")))?;
    let addr = format!("127.0.0.1:{}", a.port);
    let handle = agentx_mcp::http::serve(&addr, gateway.http_service())
        .map_err(|e| CliError::Config(format!("cannot listen on {addr}: {e}")))?;
    let base = handle.base_url();
    {
        let mut stdout = std::io::stdout().lock();
        let _ = writeln!(stdout, "listening on {base} ({})", cfg.mode);
        let mut routes: Vec<_> = gateway.deployment().functions.iter().collect();
        routes.sort_by(|x, y| x.route.cmp(&y.route));
        for f in &routes {
            let _ = writeln!(
                stdout,
                "route {base}{} -> {} ({} MB)",
                f.route, f.name, f.memory_mb
            );
        }
        let _ = writeln!(stdout, "routes: {}", routes.len());
        let _ = stdout.flush();
    }

    shutdown
        .wait()
        .map_err(|e| CliError::Failed(format!("signal handler: {e}")))?;
    handle.shutdown();
    store.flush().map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    gateway
        .meter()
        .write_to(&meter_path)
        .map_err(io_err(&meter_path))?;
    let open = store.list().map(|l| l.len()).unwrap_or(0);
    println!(
        "shutdown: {open} open session(s) in {}, {} invocation(s) in {}",
        store_path.display(),
        gateway.meter().records().len(),
        meter_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// SIGTERM (unix) or Ctrl-C. Installed before the routes are announced so
/// a signal sent right after the announcement is never missed.
struct Shutdown {
    rt: tokio::runtime::Runtime,
    #[cfg(unix)]
    term: tokio::signal::unix::Signal,
}

impl Shutdown {
    fn install() -> std::io::Result<Self> {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()?;
        #[cfg(unix)]
        let term = {
            let _guard = rt.enter();
            tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())?
        };
        Ok(Shutdown {
            rt,
            #[cfg(unix)]
            term,
        })
    }

    fn wait(self) -> std::io::Result<()> {
        #[cfg(unix)]
        {
            let Shutdown { rt, mut term } = self;
            rt.block_on(async {
                tokio::select! {
                    _ = term.recv() => Ok(()),
                    r = tokio::signal::ctrl_c() => r,
                }
            })
        }
        #[cfg(not(unix))]
        {
            self.rt.block_on(tokio::signal::ctrl_c())
        }
    }
}

fn bench_err(e: BenchError) -> CliError {
    match e {
        BenchError::Matrix(_) => CliError::Config(e.to_string()),
        BenchError::Engine(inner) => engine_err(inner),
        other => CliError::Failed(other.to_string()),
    }
}

pub fn bench(a: BenchArgs) -> Result<ExitCode, CliError> {
    let out = out_dir(&a.engine, "bench-out");
    let (mut matrix, bundled) = match &a.matrix {
        Some(p) => (Matrix::load(p).map_err(config_err)?, false),
        None => (Matrix::bundled(), true),
    };
    if let Some(m) = a.engine.mode {
        matrix.mode = m.into();
    }
    matrix.validate().map_err(config_err)?;
    let cfg = load_config(
        &EngineArgs {
            llm: None,
            ..a.engine.clone()
        },
        &out,
    )?;

    let judge_backend: Option<Arc<dyn ChatBackend>> = match (&a.engine.llm, &matrix.judge) {
        (Some(spec), _) => Some(Arc::from(backend(spec)?)),
        (None, Some(_)) if bundled => Some(Arc::new(agentx_llm::ScriptedBackend::new(
            Matrix::bundled_judge_script(),
        ))),
        (None, Some(j)) => Some(Arc::from(backend(&j.llm)?)),
        (None, None) => None,
    };
    let opts = BenchOptions {
        parallel: a.parallel,
        judge: judge_backend.map(|b| {
            (
                Judge {
                    model: cfg.model.clone(),
                    prices: cfg.prices.clone(),
                    ..Judge::default()
                },
                b,
            )
        }),
        reports_dir: Some(out.join("runs")),
    };
    let report =
        run_matrix(&matrix, &cfg, &ScriptDir::for_matrix(&matrix), &opts).map_err(bench_err)?;
    print!("{}", render_table(&report));
    let files = write_bundle(&report, &out).map_err(bench_err)?;
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(if report.any_exhausted() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn report(a: ReportArgs) -> Result<ExitCode, CliError> {
    let path = if a.file.is_dir() {
        a.file.join("bench.json")
    } else {
        a.file.clone()
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rendered = if is_run_report(&text) {
        let r = RunReport::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        match a.format {
            Format::Table => render_run(&r),
            Format::Csv => run_csv(&r).map_err(|e| CliError::Failed(e.to_string()))?,
        }
    } else {
        let r = BenchReport::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        match a.format {
            Format::Table => render_table(&r),
            Format::Csv => cells_csv(&r).map_err(|e| CliError::Failed(e.to_string()))?,
        }
    };
    print!("{rendered}");
    Ok(ExitCode::SUCCESS)
}
