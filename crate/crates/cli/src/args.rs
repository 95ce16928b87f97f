use std::path::PathBuf;

use agentx_engine::RunMode;
use agentx_patterns::PatternKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "agentx",
    version,
    about = "Run agentic workflows locally or on emulated FaaS, benchmark them and render reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one workflow and write run-<id>.json.
    Run(RunArgs),
    /// Serve the tool servers behind the FaaS gateway until SIGTERM or Ctrl-C.
    Serve(ServeArgs),
    /// Run a benchmark matrix and write the report bundle.
    Bench(BenchArgs),
    /// Render a bench.v1 or trace.v1 report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    Agentx,
    React,
    Orchestrator,
}

impl From<PatternArg> for PatternKind {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Agentx => PatternKind::Agentx,
            PatternArg::React => PatternKind::React,
            PatternArg::Orchestrator => PatternKind::Orchestrator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(alias = "local_mcp")]
    Local,
    #[value(alias = "faas_distributed")]
    FaasDistributed,
    #[value(alias = "faas_monolithic")]
    FaasMonolithic,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Local => RunMode::LocalMcp,
            ModeArg::FaasDistributed => RunMode::FaasDistributed,
            ModeArg::FaasMonolithic => RunMode::FaasMonolithic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
}

/// Flags shared by every command that builds an engine.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Engine config (JSON, `${VAR}` interpolated).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Chat backend: scripted:<path>, http or an http(s) URL. Overrides the config.
    #[arg(long, value_name = "SPEC")]
    pub llm: Option<String>,
    /// Where tools are hosted. Overrides the config.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Fail any live network call instead of making it.
    #[arg(long)]
    pub no_network: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Agent pattern.
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    /// Task id (e.g. web_search-edge) or prompt text.
    #[arg(long, value_name = "ID|PROMPT")]
    pub task: String,
    /// Fixes the run id and switches to the logical clock so the trace replays.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Port to listen on (127.0.0.1); 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Matrix file; the bundled matrix when absent.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Cells run concurrently.
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub parallel: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// bench.json, a run-<id>.json, or a bundle directory.
    #[arg(value_name = "FILE")]
    pub file: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

/// `--flag  subcommands` lines for every long flag, so top-level help
/// lists them all.
fn flag_index(cmd: &clap::Command) -> String {
    let mut flags: Vec<(String, Vec<String>)> = Vec::new();
    for sub in cmd.get_subcommands() {
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            let name = format!("--{long}");
            match flags.iter_mut().find(|(f, _)| *f == name) {
                Some((_, subs)) => subs.push(sub.get_name().to_string()),
                None => flags.push((name, vec![sub.get_name().to_string()])),
            }
        }
    }
    flags.sort();
    let width = flags.iter().map(|(f, _)| f.len()).max().unwrap_or(0);
    let mut out = String::from("Flags by command:\n");
    for (f, subs) in flags {
        out.push_str(&format!("  {f:width$}  {}\n", subs.join(", ")));
    }
    out
}

pub fn command() -> clap::Command {
    let cmd = Cli::command();
    let index = flag_index(&cmd);
    cmd.after_help(index)
}
