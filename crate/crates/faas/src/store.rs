//! Session persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use agentx_mcp::{safe_component, SessionBackend, SessionIds, SessionInfo};

use crate::FaasError;

/// Key-value store of open sessions.
pub trait SessionStore: Send + Sync {
    fn put(&self, info: &SessionInfo) -> Result<(), FaasError>;
    fn get(&self, session_id: &str) -> Result<Option<SessionInfo>, FaasError>;
    fn remove(&self, session_id: &str) -> Result<bool, FaasError>;
    fn list(&self) -> Result<Vec<SessionInfo>, FaasError>;
    /// Forces buffered state to durable storage.
    fn flush(&self) -> Result<(), FaasError> {
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    map: Mutex<BTreeMap<String, SessionInfo>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SessionStore for MemoryStore {
    fn put(&self, info: &SessionInfo) -> Result<(), FaasError> {
        self.map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(info.session_id.clone(), info.clone());
        Ok(())
    }

    fn get(&self, id: &str) -> Result<Option<SessionInfo>, FaasError> {
        Ok(self
            .map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned())
    }

    fn remove(&self, id: &str) -> Result<bool, FaasError> {
        Ok(self
            .map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .remove(id)
            .is_some())
    }

    fn list(&self) -> Result<Vec<SessionInfo>, FaasError> {
        Ok(self
            .map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect())
    }
}

/// JSON file store; every mutation is written through, so the file always
/// reflects the open sessions.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    map: Mutex<BTreeMap<String, SessionInfo>>,
}

impl FileStore {
    /// Opens (or creates) the store, loading any sessions already on disk.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, FaasError> {
        let path = path.into();
        let map = if path.exists() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| FaasError::StoreUnavailable(e.to_string()))?;
            let v: Vec<SessionInfo> = serde_json::from_str(&text)
                .map_err(|e| FaasError::StoreUnavailable(format!("corrupt store: {e}")))?;
            v.into_iter().map(|s| (s.session_id.clone(), s)).collect()
        } else {
            BTreeMap::new()
        };
        let store = FileStore {
            path,
            map: Mutex::new(map),
        };
        store.flush()?;
        Ok(store)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write(&self, map: &BTreeMap<String, SessionInfo>) -> Result<(), FaasError> {
        let err = |e: std::io::Error| FaasError::StoreUnavailable(e.to_string());
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir).map_err(err)?;
        }
        let list: Vec<&SessionInfo> = map.values().collect();
        let tmp = self.path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(&list).expect("serializes")).map_err(err)?;
        std::fs::rename(&tmp, &self.path).map_err(err)
    }
}

impl SessionStore for FileStore {
    fn put(&self, info: &SessionInfo) -> Result<(), FaasError> {
        let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        map.insert(info.session_id.clone(), info.clone());
        self.write(&map)
    }

    fn get(&self, id: &str) -> Result<Option<SessionInfo>, FaasError> {
        Ok(self
            .map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned())
    }

    fn remove(&self, id: &str) -> Result<bool, FaasError> {
        let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        let existed = map.remove(id).is_some();
        if existed {
            self.write(&map)?;
        }
        Ok(existed)
    }

    fn list(&self) -> Result<Vec<SessionInfo>, FaasError> {
        Ok(self
            .map
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect())
    }

    fn flush(&self) -> Result<(), FaasError> {
        let map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        self.write(&map)
    }
}

/// Sessions of hosted functions: persisted in a [`SessionStore`], each with
/// a private workspace `<tmp_root>/<function>/<session_id>` standing in for
/// the function instance's `/tmp`.
pub struct FaasSessions {
    store: Arc<dyn SessionStore>,
    tmp_root: PathBuf,
    ids: SessionIds,
}

impl std::fmt::Debug for FaasSessions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaasSessions")
            .field("tmp_root", &self.tmp_root)
            .finish()
    }
}

impl FaasSessions {
    pub fn new(
        store: Arc<dyn SessionStore>,
        tmp_root: impl Into<PathBuf>,
        ids: SessionIds,
    ) -> Self {
        FaasSessions {
            store,
            tmp_root: tmp_root.into(),
            ids,
        }
    }

    pub fn store(&self) -> &Arc<dyn SessionStore> {
        &self.store
    }
}

impl SessionBackend for FaasSessions {
    fn create(&self, server: &str, app_instance: &str) -> Result<SessionInfo, String> {
        let session_id = self.ids.next_id();
        let workspace = self
            .tmp_root
            .join(safe_component(server)?)
            .join(safe_component(&session_id)?);
        std::fs::create_dir_all(&workspace).map_err(|e| e.to_string())?;
        let info = SessionInfo {
            session_id,
            server: server.to_string(),
            app_instance: app_instance.to_string(),
            workspace,
            created_at_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            kv: BTreeMap::new(),
        };
        self.store.put(&info).map_err(|e| e.to_string())?;
        Ok(info)
    }

    fn get(&self, session_id: &str) -> Option<SessionInfo> {
        self.store.get(session_id).ok().flatten()
    }

    fn delete(&self, session_id: &str) -> bool {
        let Some(info) = self.get(session_id) else {
            return false;
        };
        let removed = self.store.remove(session_id).unwrap_or(false);
        if removed {
            let _ = std::fs::remove_dir_all(&info.workspace);
        }
        removed
    }

    fn list(&self) -> Vec<SessionInfo> {
        self.store.list().unwrap_or_default()
    }
}
