//! `code_executor` server: runs Python in the session workspace.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant, SystemTime};

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fixtures::FixtureSet;
use crate::place::Location;
use crate::{handler, str_arg, Tool, ToolError, ToolpackConfig};

const SCRATCH: &str = ".exec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeMode {
    /// Replay recorded executions keyed by the source digest.
    #[default]
    Fixture,
    Live,
    /// Run live and store the execution as a fixture.
    Record,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeConfig {
    pub mode: CodeMode,
    pub interpreter: String,
    pub timeout_s: u64,
    pub output_cap: usize,
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig {
            mode: CodeMode::Fixture,
            interpreter: "python3".into(),
            timeout_s: 30,
            output_cap: 1 << 20,
        }
    }
}

/// A recorded execution. File contents are base64.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
    #[serde(default)]
    pub files: BTreeMap<String, String>,
}

pub fn source_key(code: &str) -> String {
    hex::encode(Sha256::digest(code.as_bytes()))
}

type Snapshot = BTreeMap<String, (u64, Option<SystemTime>)>;

fn snapshot(root: &Path) -> Snapshot {
    fn walk(root: &Path, dir: &Path, out: &mut Snapshot) {
        let Ok(entries) = std::fs::read_dir(dir) else {
            return;
        };
        for e in entries.flatten() {
            let path = e.path();
            let Ok(rel) = path.strip_prefix(root) else {
                continue;
            };
            if rel.starts_with(SCRATCH) {
                continue;
            }
            if path.is_dir() {
                walk(root, &path, out);
            } else if let Ok(meta) = e.metadata() {
                let rel = rel.to_string_lossy().replace('\\', "/");
                out.insert(rel, (meta.len(), meta.modified().ok()));
            }
        }
    }
    let mut out = Snapshot::new();
    walk(root, root, &mut out);
    out
}

fn read_capped(mut r: impl Read, cap: usize) -> (Vec<u8>, bool) {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 8192];
    let mut over = false;
    loop {
        match r.read(&mut chunk) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                if buf.len() + n > cap {
                    over = true;
                    let room = cap - buf.len();
                    buf.extend_from_slice(&chunk[..room]);
                } else if !over {
                    buf.extend_from_slice(&chunk[..n]);
                }
            }
        }
    }
    (buf, over)
}

/// Runs `code` with the configured interpreter in `workspace`.
pub fn run_live(cfg: &CodeConfig, workspace: &Path, code: &str) -> Result<Execution, ToolError> {
    let scratch = workspace.join(SCRATCH);
    std::fs::create_dir_all(&scratch)?;
    let script: PathBuf = scratch.join(format!("{}.py", &source_key(code)[..16]));
    std::fs::write(&script, code)?;
    let before = snapshot(workspace);
    let mut child = Command::new(&cfg.interpreter)
        .arg(&script)
        .current_dir(workspace)
        .env("MPLBACKEND", "Agg")
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ToolError::NoInterpreter(cfg.interpreter.clone()),
            _ => ToolError::Io(e.to_string()),
        })?;
    let cap = cfg.output_cap;
    let out = child.stdout.take().expect("piped");
    let err = child.stderr.take().expect("piped");
    let out_t = std::thread::spawn(move || read_capped(out, cap));
    let err_t = std::thread::spawn(move || read_capped(err, cap));
    let deadline = Instant::now() + Duration::from_secs(cfg.timeout_s);
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break s;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ToolError::Timeout(cfg.timeout_s));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let (stdout, over_out) = out_t.join().unwrap_or_default();
    let (stderr, over_err) = err_t.join().unwrap_or_default();
    let _ = std::fs::remove_file(&script);
    if over_out || over_err {
        return Err(ToolError::OutputTooLarge(cap));
    }
    let after = snapshot(workspace);
    let engine = base64::engine::general_purpose::STANDARD;
    let mut files = BTreeMap::new();
    for (rel, stamp) in &after {
        if before.get(rel) != Some(stamp) {
            files.insert(
                rel.clone(),
                engine.encode(std::fs::read(workspace.join(rel))?),
            );
        }
    }
    Ok(Execution {
        stdout: String::from_utf8_lossy(&stdout).into_owned(),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
        exit_code: status.code().unwrap_or(-1),
        files,
    })
}

/// Replays a recorded execution, materializing its files in `workspace`.
pub fn replay(fx: &FixtureSet, workspace: &Path, code: &str) -> Result<Execution, ToolError> {
    let key = source_key(code);
    let exec: Execution = fx
        .read_json("code_executor", &format!("{key}.json"))
        .map_err(|_| ToolError::NoFixture(format!("code with digest {key}")))?;
    let engine = base64::engine::general_purpose::STANDARD;
    for (rel, b64) in &exec.files {
        let (path, _) = crate::confine(workspace, rel)?;
        let bytes = engine
            .decode(b64)
            .map_err(|e| ToolError::Io(format!("fixture file {rel}: {e}")))?;
        if let Some(p) = path.parent() {
            std::fs::create_dir_all(p)?;
        }
        std::fs::write(path, bytes)?;
    }
    Ok(exec)
}

pub fn record(fx: &FixtureSet, code: &str, exec: &Execution) -> Result<(), ToolError> {
    let path = fx.path("code_executor", &format!("{}.json", source_key(code)));
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p)?;
    }
    std::fs::write(path, serde_json::to_vec_pretty(exec).expect("serializes"))?;
    Ok(())
}

pub fn render(exec: &Execution) -> String {
    let files: Vec<&str> = exec.files.keys().map(String::as_str).collect();
    format!(
        "exit_code: {}\nstdout:\n{}\nstderr:\n{}\nfiles: {}",
        exec.exit_code,
        exec.stdout,
        exec.stderr,
        if files.is_empty() {
            "(none)".to_string()
        } else {
            files.join(", ")
        }
    )
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let fx = FixtureSet::new(&cfg.fixtures);
    let code_cfg = cfg.code.clone();
    let blobs = cfg.blobs.clone();
    vec![Tool {
        descriptor: ToolDescriptor::new(
            "code_executor",
            "execute_code",
            "Execute a Python script in a persistent working directory where matplotlib and pandas are installed. \
             Returns stdout, stderr, the exit code and the files the script created or changed. \
             Set upload_prefix to an s3:// location to also upload those files there.",
            Origin::Custom,
        )
        .param(ParamSpec::required("code", ParamType::String, "Python source to run."))
        .param(ParamSpec::optional("upload_prefix", ParamType::String, "Optional s3:// prefix for created files.")),
        handler: handler(move |ctx, args| {
            let code = str_arg(args, "code")?;
            let exec = match code_cfg.mode {
                CodeMode::Fixture => replay(&fx, &ctx.workspace, code)?,
                CodeMode::Live => run_live(&code_cfg, &ctx.workspace, code)?,
                CodeMode::Record => {
                    let e = run_live(&code_cfg, &ctx.workspace, code)?;
                    record(&fx, code, &e)?;
                    e
                }
            };
            let mut uris: Vec<String> = exec.files.keys().map(|f| format!("file:{f}")).collect();
            if let Some(prefix) = args.get("upload_prefix").and_then(|v| v.as_str()) {
                let dest = Location::parse(&ctx.workspace, prefix)?;
                if !matches!(dest, Location::Blob(_)) {
                    return Err(ToolError::InvalidArgument("upload_prefix must be an s3:// URI".into()));
                }
                for rel in exec.files.keys() {
                    let bytes = std::fs::read(ctx.workspace.join(rel))?;
                    uris.push(dest.join(rel)?.write(&blobs, &bytes)?);
                }
            }
            let content = render(&exec);
            Ok(if exec.exit_code == 0 {
                ToolResult::ok(content)
            } else {
                ToolResult::error(content)
            }
            .with_uris(uris))
        }),
        exclusive: true,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn python() -> Option<CodeConfig> {
        let cfg = CodeConfig {
            mode: CodeMode::Live,
            ..CodeConfig::default()
        };
        Command::new(&cfg.interpreter)
            .arg("--version")
            .output()
            .ok()
            .map(|_| cfg)
    }

    #[test]
    fn live_print() {
        let Some(cfg) = python() else { return };
        let ws = tempfile::tempdir().unwrap();
        let e = run_live(&cfg, ws.path(), "print(1+1)").unwrap();
        assert_eq!((e.stdout.as_str(), e.exit_code), ("2\n", 0));
        assert!(e.files.is_empty());
    }

    #[test]
    fn live_files_and_failures() {
        let Some(cfg) = python() else { return };
        let ws = tempfile::tempdir().unwrap();
        let e = run_live(
            &cfg,
            ws.path(),
            "open('AppleGoogleMicrosoft.png','wb').write(b'x')",
        )
        .unwrap();
        assert_eq!(
            e.files.keys().collect::<Vec<_>>(),
            vec!["AppleGoogleMicrosoft.png"]
        );
        let bad = run_live(&cfg, ws.path(), "def (:").unwrap();
        assert_ne!(bad.exit_code, 0);
        assert!(bad.stderr.contains("SyntaxError"));
    }

    #[test]
    fn limits() {
        let Some(cfg) = python() else { return };
        let ws = tempfile::tempdir().unwrap();
        let short = CodeConfig {
            timeout_s: 1,
            ..cfg.clone()
        };
        assert_eq!(
            run_live(&short, ws.path(), "import time\ntime.sleep(5)"),
            Err(ToolError::Timeout(1))
        );
        let small = CodeConfig {
            output_cap: 100,
            ..cfg
        };
        assert_eq!(
            run_live(&small, ws.path(), "print('x'*1000)"),
            Err(ToolError::OutputTooLarge(100))
        );
        let none = CodeConfig {
            interpreter: "definitely-not-python".into(),
            ..CodeConfig::default()
        };
        assert!(matches!(
            run_live(&none, ws.path(), "1"),
            Err(ToolError::NoInterpreter(_))
        ));
    }

    #[test]
    fn record_then_replay() {
        let fx_dir = tempfile::tempdir().unwrap();
        let ws = tempfile::tempdir().unwrap();
        let fx = FixtureSet::new(fx_dir.path());
        let mut files = BTreeMap::new();
        files.insert(
            "out/plot.png".to_string(),
            base64::engine::general_purpose::STANDARD.encode(b"png"),
        );
        let exec = Execution {
            stdout: "ok\n".into(),
            stderr: String::new(),
            exit_code: 0,
            files,
        };
        record(&fx, "plot()", &exec).unwrap();
        assert_eq!(replay(&fx, ws.path(), "plot()").unwrap(), exec);
        assert_eq!(
            std::fs::read(ws.path().join("out/plot.png")).unwrap(),
            b"png"
        );
        assert!(matches!(
            replay(&fx, ws.path(), "other()"),
            Err(ToolError::NoFixture(_))
        ));
    }
}
