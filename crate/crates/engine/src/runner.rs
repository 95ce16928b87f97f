//! One run: wire tools for the configured mode, run the pattern, check the
//! artifact, sweep sessions and assemble the report.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use agentx_core::{
    net, Clock, Decimal, FailureReason, LogicalClock, Outcome, RunReport, SystemClock, Task,
    Totals, Tracer, TRACE_SCHEMA,
};
use agentx_faas::{
    builtin_manifests, parse_manifests, BlobStore, Deployment, FaasSessions, FileStore,
    FunctionManifest, Gateway, InvocationRecord, MemoryStore, SessionStore,
};
use agentx_llm::{
    llm_cost, ChatBackend, Exchange, HttpBackend, HttpBackendConfig, Llm, Script, ScriptedBackend,
};
use agentx_mcp::{
    InProcessTransport, LocalSessions, McpServer, SessionIds, ToolBox, ToolExchange, Transport,
};
use agentx_patterns::{run_pattern, PatternKind};
use agentx_toolpack::{build_registry, default_fixture_root, ToolpackConfig, SERVERS};

use crate::apps::{artifact_rule, ArtifactRule};
use crate::artifacts;
use crate::config::{ClockKind, EngineConfig, LlmSpec, RunMode};
use crate::EngineError;

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub llm: Vec<Exchange>,
    pub tools: Vec<ToolExchange>,
    pub meter: Vec<InvocationRecord>,
    /// The run's shared workspace (local mode).
    pub workspace: PathBuf,
    pub blob_root: PathBuf,
}

impl RunOutput {
    /// Serialized trace, the unit of replay comparison.
    pub fn trace_json(&self) -> String {
        serde_json::to_string(&self.report.trace).expect("trace serializes")
    }
}

pub struct Engine {
    cfg: EngineConfig,
    manifests: Vec<FunctionManifest>,
    fixture_root: PathBuf,
    store: Option<Arc<FileStore>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("mode", &self.cfg.mode)
            .finish()
    }
}

/// Builds the chat backend an [`LlmSpec`] names.
pub fn backend_from_spec(spec: &LlmSpec) -> Result<Box<dyn ChatBackend>, EngineError> {
    match spec {
        LlmSpec::Scripted(path) => Ok(Box::new(ScriptedBackend::new(Script::load(path)?))),
        LlmSpec::Http { url } => {
            let cfg = match (HttpBackendConfig::from_env(), url) {
                (Ok(mut c), Some(u)) => {
                    c.url = u.clone();
                    c
                }
                (Ok(c), None) => c,
                (Err(_), Some(u)) => HttpBackendConfig {
                    url: u.clone(),
                    api_key: std::env::var("AGENTX_LLM_KEY").ok(),
                    model: None,
                    timeout: std::time::Duration::from_secs(120),
                },
                (Err(e), None) => return Err(e.into()),
            };
            Ok(Box::new(HttpBackend::new(cfg)))
        }
    }
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        let manifests = match &cfg.manifest {
            Some(p) => parse_manifests(&read(p)?)?,
            None => builtin_manifests(),
        };
        let store = match &cfg.session_store {
            Some(p) => Some(Arc::new(FileStore::open(p)?)),
            None => None,
        };
        if cfg.no_network {
            net::set_network_denied(true);
        }
        let fixture_root = cfg
            .fixture_root
            .clone()
            .unwrap_or_else(default_fixture_root);
        Ok(Engine {
            cfg,
            manifests,
            fixture_root,
            store,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn mode(&self) -> RunMode {
        self.cfg.mode
    }

    pub fn manifests(&self) -> &[FunctionManifest] {
        &self.manifests
    }

    /// The toolpack configuration a run under this engine uses.
    pub fn toolpack_config(&self, blob_root: &Path) -> ToolpackConfig {
        let mut tp = ToolpackConfig::new(self.cfg.mode.profile(), blob_root);
        tp.mode = self.cfg.tools.mode;
        tp.fixtures = self.fixture_root.clone();
        tp.code = self.cfg.tools.code.clone();
        tp.rag = self.cfg.tools.rag.clone();
        tp.live = self.cfg.tools.live.clone();
        tp.load_full_articles = self.cfg.tools.load_full_articles;
        tp
    }

    fn clock(&self) -> Arc<dyn Clock> {
        match self.cfg.clock {
            ClockKind::System => Arc::new(SystemClock::new()),
            ClockKind::Logical => Arc::new(LogicalClock::new(self.cfg.logical_step_ms)),
        }
    }

    /// Runs `pattern` on `task`, checking the artifact the task's app
    /// requires.
    pub fn run(
        &self,
        pattern: PatternKind,
        task: &Task,
        backend: &dyn ChatBackend,
        run_id: &str,
    ) -> Result<RunOutput, EngineError> {
        let rule = match task.app_label {
            agentx_core::AppLabel::Custom => ArtifactRule::None,
            app => artifact_rule(app, instance_index(task)),
        };
        self.run_with_rule(pattern, task, &rule, backend, run_id)
    }

    pub fn run_with_rule(
        &self,
        pattern: PatternKind,
        task: &Task,
        rule: &ArtifactRule,
        backend: &dyn ChatBackend,
        run_id: &str,
    ) -> Result<RunOutput, EngineError> {
        agentx_mcp::safe_component(run_id).map_err(EngineError::RunId)?;
        let run_dir = self.cfg.work_root.join("runs").join(run_id);
        if run_dir.exists() {
            std::fs::remove_dir_all(&run_dir)?;
        }
        let blob_root = run_dir.join("blobs");
        let ws_root = run_dir.join("ws");
        std::fs::create_dir_all(&ws_root)?;
        let tp = self.toolpack_config(&blob_root);
        let blobs: Arc<BlobStore> = tp.blobs.clone();
        let registry = Arc::new(build_registry(&tp));
        let tracer = Tracer::new(run_id, self.clock());

        let (transports, gateway): (Vec<Arc<dyn Transport>>, Option<Arc<Gateway>>) =
            match self.cfg.mode.deploy_mode() {
                None => {
                    let sessions = Arc::new(LocalSessions::new(
                        &ws_root,
                        SessionIds::sequential(&format!("{run_id}-")),
                    ));
                    let transports = SERVERS
                        .iter()
                        .map(|s| {
                            McpServer::single(registry.clone(), s, sessions.clone()).map(|srv| {
                                Arc::new(InProcessTransport::new(Arc::new(srv)))
                                    as Arc<dyn Transport>
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    (transports, None)
                }
                Some(mode) => {
                    let store: Arc<dyn SessionStore> = match &self.store {
                        Some(s) => s.clone(),
                        None => Arc::new(MemoryStore::new()),
                    };
                    let sessions = Arc::new(FaasSessions::new(
                        store,
                        run_dir.join("tmp"),
                        SessionIds::sequential(&format!("{run_id}-")),
                    ));
                    let deployment =
                        Deployment::deploy(&self.manifests, mode, registry.clone(), sessions)?;
                    let gw = Arc::new(Gateway::new(deployment, self.cfg.gb_second_rate));
                    (gw.transports(), Some(gw))
                }
            };

        let started_ms = tracer.now_ms();
        let mut tools = ToolBox::connect(transports, run_id, tracer.clone())?;
        let mut llm = Llm::new(
            backend,
            tracer.clone(),
            self.cfg.prices.clone(),
            &self.cfg.model,
        );
        let output = run_pattern(pattern, &self.cfg.patterns, task, &mut llm, &mut tools)?;

        let workspace = ws_root.join(run_id);
        let check = artifacts::check(
            rule,
            self.cfg.mode.profile(),
            &workspace,
            &blobs,
            tools.exchanges(),
        );
        let (outcome, artifacts) = match (output.outcome, check) {
            (Outcome::Success, Ok(found)) => (Outcome::Success, found),
            (Outcome::Success, Err(missing)) => (
                Outcome::failure(FailureReason::ArtifactMissing, missing),
                vec![],
            ),
            (failed, found) => (failed, found.unwrap_or_default()),
        };

        let session_ids = tools.session_ids();
        tools.close();
        let ended_ms = tracer.now_ms();
        let meter = gateway
            .as_ref()
            .map(|g| g.meter().for_sessions(&session_ids))
            .unwrap_or_default();

        let trace = tracer.events();
        let mut totals = Totals::from_trace(&trace, ended_ms.saturating_sub(started_ms));
        totals.llm_cost_usd = llm_cost(totals.tokens_in, totals.tokens_out, &self.cfg.prices);
        totals.faas_cost_usd = meter
            .iter()
            .map(|r| r.billed_usd)
            .sum::<Decimal>()
            .normalize();

        let report = RunReport {
            schema: TRACE_SCHEMA.to_string(),
            run_id: run_id.to_string(),
            task: task.clone(),
            pattern: pattern.as_str().to_string(),
            mode: self.cfg.mode.as_str().to_string(),
            outcome,
            stages: output.stages,
            started_ms,
            ended_ms,
            totals,
            artifacts,
            final_answer: output.final_answer,
            trace,
        };
        Ok(RunOutput {
            report,
            llm: llm.into_exchanges(),
            tools: tools.into_exchanges(),
            meter,
            workspace,
            blob_root,
        })
    }
}

fn read(p: &Path) -> Result<String, EngineError> {
    std::fs::read_to_string(p).map_err(|e| EngineError::Io(format!("{}: {e}", p.display())))
}

/// Instance index of an app task, recovered from its label.
pub fn instance_index(task: &Task) -> usize {
    (0..crate::apps::instance_count(task.app_label))
        .find(|&i| crate::apps::instance_label(task.app_label, i) == task.instance_label)
        .unwrap_or(0)
}
