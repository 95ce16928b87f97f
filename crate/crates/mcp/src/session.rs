//! Session bookkeeping for hosted servers.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub server: String,
    pub app_instance: String,
    pub workspace: PathBuf,
    pub created_at_ms: u64,
    #[serde(default)]
    pub kv: BTreeMap<String, String>,
}

/// Where sessions live. Local hosting keeps them in memory; FaaS hosting
/// persists them in a store.
pub trait SessionBackend: Send + Sync {
    fn create(&self, server: &str, app_instance: &str) -> Result<SessionInfo, String>;
    fn get(&self, session_id: &str) -> Option<SessionInfo>;
    /// Returns false when the session did not exist.
    fn delete(&self, session_id: &str) -> bool;
    fn list(&self) -> Vec<SessionInfo>;
}

/// Session id source: random, or a deterministic counter for golden
/// transcripts.
#[derive(Debug)]
pub enum SessionIds {
    Random,
    Sequential { prefix: String, next: AtomicU64 },
}

impl SessionIds {
    pub fn sequential(prefix: &str) -> Self {
        SessionIds::Sequential {
            prefix: prefix.to_string(),
            next: AtomicU64::new(1),
        }
    }

    pub fn next_id(&self) -> String {
        match self {
            SessionIds::Random => uuid::Uuid::new_v4().simple().to_string(),
            SessionIds::Sequential { prefix, next } => {
                format!("{prefix}{:04}", next.fetch_add(1, Ordering::Relaxed))
            }
        }
    }
}

pub(crate) fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Sessions for locally hosted servers. All servers of one application
/// instance share the workspace `<root>/<app_instance>`, like processes on
/// one machine sharing a filesystem.
#[derive(Debug)]
pub struct LocalSessions {
    root: PathBuf,
    ids: SessionIds,
    sessions: Mutex<HashMap<String, SessionInfo>>,
}

impl LocalSessions {
    pub fn new(root: impl Into<PathBuf>, ids: SessionIds) -> Self {
        LocalSessions {
            root: root.into(),
            ids,
            sessions: Mutex::default(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<String, SessionInfo>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Rejects instance labels that would escape the workspace root.
pub fn safe_component(s: &str) -> Result<&str, String> {
    let ok = !s.is_empty()
        && s != "."
        && s != ".."
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(s)
    } else {
        Err(format!("invalid path component {s:?}"))
    }
}

impl SessionBackend for LocalSessions {
    fn create(&self, server: &str, app_instance: &str) -> Result<SessionInfo, String> {
        let workspace = self.root.join(safe_component(app_instance)?);
        std::fs::create_dir_all(&workspace)
            .map_err(|e| format!("cannot create workspace {}: {e}", workspace.display()))?;
        let info = SessionInfo {
            session_id: self.ids.next_id(),
            server: server.to_string(),
            app_instance: app_instance.to_string(),
            workspace,
            created_at_ms: now_ms(),
            kv: BTreeMap::new(),
        };
        self.lock().insert(info.session_id.clone(), info.clone());
        Ok(info)
    }

    fn get(&self, session_id: &str) -> Option<SessionInfo> {
        self.lock().get(session_id).cloned()
    }

    fn delete(&self, session_id: &str) -> bool {
        self.lock().remove(session_id).is_some()
    }

    fn list(&self) -> Vec<SessionInfo> {
        let mut v: Vec<_> = self.lock().values().cloned().collect();
        v.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        v
    }
}
