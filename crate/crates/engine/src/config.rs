//! Engine configuration: one JSON file, `${VAR}` interpolation, unknown
//! keys rejected.

use std::path::{Path, PathBuf};

use agentx_core::Decimal;
use agentx_faas::{default_gb_s_rate, DeployMode};
use agentx_llm::PriceTable;
use agentx_patterns::PatternConfig;
use agentx_toolpack::code::CodeConfig;
use agentx_toolpack::rag::RagConfig;
use agentx_toolpack::{LiveConfig, Mode, Profile};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("environment variable {0} is not set")]
    MissingVar(String),
    #[error("{field} points to {path}, which does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    #[serde(alias = "local")]
    LocalMcp,
    #[serde(alias = "faas-distributed")]
    FaasDistributed,
    #[serde(alias = "faas-monolithic")]
    FaasMonolithic,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [
        RunMode::LocalMcp,
        RunMode::FaasDistributed,
        RunMode::FaasMonolithic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::LocalMcp => "local_mcp",
            RunMode::FaasDistributed => "faas_distributed",
            RunMode::FaasMonolithic => "faas_monolithic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "local" | "local_mcp" => Some(RunMode::LocalMcp),
            "faas_distributed" | "distributed" => Some(RunMode::FaasDistributed),
            "faas_monolithic" | "monolithic" => Some(RunMode::FaasMonolithic),
            _ => None,
        }
    }

    pub fn profile(self) -> Profile {
        match self {
            RunMode::LocalMcp => Profile::Local,
            RunMode::FaasDistributed | RunMode::FaasMonolithic => Profile::Faas,
        }
    }

    pub fn deploy_mode(self) -> Option<DeployMode> {
        match self {
            RunMode::LocalMcp => None,
            RunMode::FaasDistributed => Some(DeployMode::Distributed),
            RunMode::FaasMonolithic => Some(DeployMode::Monolithic),
        }
    }
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockKind {
    #[default]
    System,
    /// Every clock reading advances by `logical_step_ms`; makes traces
    /// replay byte-identically.
    Logical,
}

/// Which chat backend to use: `scripted:<path>`, `http` (endpoint from the
/// environment) or `http:<base url>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LlmSpec {
    Scripted(PathBuf),
    Http { url: Option<String> },
}

impl LlmSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        if let Some(path) = s.strip_prefix("scripted:") {
            return Ok(LlmSpec::Scripted(PathBuf::from(path)));
        }
        if s == "http" {
            return Ok(LlmSpec::Http { url: None });
        }
        if let Some(url) = s
            .strip_prefix("http:")
            .filter(|u| u.starts_with("//") || u.starts_with("http"))
        {
            let url = if url.starts_with("//") {
                format!("http:{url}")
            } else {
                url.to_string()
            };
            return Ok(LlmSpec::Http { url: Some(url) });
        }
        if s.starts_with("https://") || s.starts_with("http://") {
            return Ok(LlmSpec::Http {
                url: Some(s.to_string()),
            });
        }
        Err(ConfigError::Invalid(format!(
            "llm must be scripted:<path>, http or an http(s) URL, got {s:?}"
        )))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolsConfig {
    pub mode: Mode,
    pub code: CodeConfig,
    pub rag: RagConfig,
    pub live: LiveConfig,
    pub load_full_articles: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Backend spec, see [`LlmSpec`]. Empty means it must come from the
    /// command line.
    pub llm: String,
    pub model: String,
    pub mode: RunMode,
    /// FaaS function manifests (JSON list). Defaults to the eight built-in
    /// servers.
    pub manifest: Option<PathBuf>,
    pub fixture_root: Option<PathBuf>,
    /// Per-run workspaces, blob roots and session scratch space go here.
    pub work_root: PathBuf,
    /// File-backed FaaS session store; in memory when unset.
    pub session_store: Option<PathBuf>,
    pub prices: PriceTable,
    pub gb_second_rate: Decimal,
    pub clock: ClockKind,
    pub logical_step_ms: u64,
    pub no_network: bool,
    pub patterns: PatternConfig,
    pub tools: ToolsConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            llm: String::new(),
            model: "gpt-4o-mini".into(),
            mode: RunMode::LocalMcp,
            manifest: None,
            fixture_root: None,
            work_root: PathBuf::from("agentx-work"),
            session_store: None,
            prices: PriceTable::default(),
            gb_second_rate: default_gb_s_rate(),
            clock: ClockKind::System,
            logical_step_ms: 1,
            no_network: false,
            patterns: PatternConfig::default(),
            tools: ToolsConfig::default(),
        }
    }
}

/// Replaces `${NAME}` with `lookup(NAME)`. A `$` not followed by `{` is
/// kept as is.
pub fn interpolate(
    text: &str,
    lookup: impl Fn(&str) -> Option<String>,
) -> Result<String, ConfigError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find("${") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| ConfigError::Parse("unterminated ${ in config".into()))?;
        let name = &after[..end];
        let valid = !name.is_empty()
            && !name.starts_with(|c: char| c.is_ascii_digit())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(ConfigError::Parse(format!(
                "invalid variable name {name:?}"
            )));
        }
        let value = lookup(name).ok_or_else(|| ConfigError::MissingVar(name.to_string()))?;
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// JSON-escapes environment values so they can sit inside string literals.
fn env_lookup(name: &str) -> Option<String> {
    let v = std::env::var(name).ok()?;
    let quoted = serde_json::to_string(&v).ok()?;
    Some(quoted[1..quoted.len() - 1].to_string())
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let text = interpolate(text, env_lookup)?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Loads, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.manifest,
            &mut self.fixture_root,
            &mut self.session_store,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.work_root);
        for p in [
            &mut self.patterns.agentx.prompt_dir,
            &mut self.patterns.react.prompt_dir,
            &mut self.patterns.orchestrator.prompt_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(rest) = self.llm.strip_prefix("scripted:") {
            let p = Path::new(rest);
            if p.is_relative() {
                self.llm = format!("scripted:{}", base.join(p).display());
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let exists = |field: &'static str, p: &Option<PathBuf>| match p {
            Some(p) if !p.exists() => Err(ConfigError::MissingPath {
                field,
                path: p.clone(),
            }),
            _ => Ok(()),
        };
        exists("manifest", &self.manifest)?;
        exists("fixture_root", &self.fixture_root)?;
        exists(
            "patterns.agentx.prompt_dir",
            &self.patterns.agentx.prompt_dir,
        )?;
        exists("patterns.react.prompt_dir", &self.patterns.react.prompt_dir)?;
        exists(
            "patterns.orchestrator.prompt_dir",
            &self.patterns.orchestrator.prompt_dir,
        )?;
        if !self.llm.is_empty() {
            if let LlmSpec::Scripted(p) = LlmSpec::parse(&self.llm)? {
                exists("llm", &Some(p))?;
            }
        }
        if !self.prices.is_valid() {
            return Err(ConfigError::Invalid("prices must be positive".into()));
        }
        if self.gb_second_rate <= Decimal::ZERO {
            return Err(ConfigError::Invalid(
                "gb_second_rate must be positive".into(),
            ));
        }
        if self.model.trim().is_empty() {
            return Err(ConfigError::Invalid("model must not be empty".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn modes_parse_from_flag_spellings() {
        assert_eq!(
            RunMode::parse("faas-distributed"),
            Some(RunMode::FaasDistributed)
        );
        assert_eq!(RunMode::parse("local"), Some(RunMode::LocalMcp));
        assert_eq!(RunMode::parse("cloud"), None);
        for m in RunMode::ALL {
            assert_eq!(RunMode::parse(m.as_str()), Some(m));
        }
        let m: RunMode = serde_json::from_str("\"faas-monolithic\"").unwrap();
        assert_eq!(m, RunMode::FaasMonolithic);
    }

    #[test]
    fn llm_specs() {
        assert_eq!(
            LlmSpec::parse("scripted:a/b.json").unwrap(),
            LlmSpec::Scripted("a/b.json".into())
        );
        assert_eq!(LlmSpec::parse("http").unwrap(), LlmSpec::Http { url: None });
        assert_eq!(
            LlmSpec::parse("https://api.example/v1").unwrap(),
            LlmSpec::Http {
                url: Some("https://api.example/v1".into())
            }
        );
        assert!(LlmSpec::parse("gpt").is_err());
    }

    #[test]
    fn interpolation() {
        let env = |k: &str| (k == "KEY").then(|| "s3cr3t".to_string());
        assert_eq!(interpolate("a ${KEY} b", env).unwrap(), "a s3cr3t b");
        assert_eq!(interpolate("cost $5", env).unwrap(), "cost $5");
        assert!(
            matches!(interpolate("${NOPE}", env), Err(ConfigError::MissingVar(v)) if v == "NOPE")
        );
        assert!(interpolate("${1X}", env).is_err());
        assert!(interpolate("${KEY", env).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EngineConfig::from_json(r#"{"mode": "local", "colour": "red"}"#).is_err());
        assert!(
            EngineConfig::from_json(r#"{"tools": {"code": {"mode": "live", "shell": "sh"}}}"#)
                .is_err()
        );
        let cfg =
            EngineConfig::from_json(r#"{"mode": "faas-distributed", "gb_second_rate": "0.00002"}"#)
                .unwrap();
        assert_eq!(cfg.mode, RunMode::FaasDistributed);
        assert_eq!(cfg.gb_second_rate, Decimal::new(2, 5));
        assert_eq!(cfg.patterns.agentx.max_attempts, 5);
    }

    #[test]
    fn load_resolves_and_checks_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"llm": "scripted:script.json", "work_root": "out"}"#,
        )
        .unwrap();
        assert!(matches!(
            EngineConfig::load(&path),
            Err(ConfigError::MissingPath { field: "llm", .. })
        ));
        std::fs::write(dir.path().join("script.json"), "{}").unwrap();
        let cfg = EngineConfig::load(&path).unwrap();
        assert_eq!(cfg.work_root, dir.path().join("out"));
        assert_eq!(
            cfg.llm,
            format!("scripted:{}", dir.path().join("script.json").display())
        );
    }

    proptest! {
        #[test]
        fn text_without_placeholders_is_unchanged(s in "[^$]{0,60}") {
            prop_assert_eq!(interpolate(&s, |_| None).unwrap(), s);
        }

        #[test]
        fn values_are_inserted_verbatim(v in "[a-zA-Z0-9 {}$]{0,20}") {
            let out = interpolate("<${X}>", |_| Some(v.clone())).unwrap();
            prop_assert_eq!(out, format!("<{v}>"));
        }
    }
}
