use std::collections::BTreeMap;
use std::sync::Arc;

use agentx_mcp::{McpServer, Registry, SessionBackend};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::manifest::FunctionManifest;
use crate::FaasError;

pub const MONOLITH_NAME: &str = "monolith";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeployMode {
    Distributed,
    Monolithic,
}

impl DeployMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeployMode::Distributed => "distributed",
            DeployMode::Monolithic => "monolithic",
        }
    }
}

/// A deployed function: provisioning, hosted servers and its MCP runtime.
#[derive(Debug, Clone)]
pub struct FunctionUnit {
    pub name: String,
    pub servers: Vec<String>,
    pub memory_mb: u32,
    pub ephemeral_storage_mb: u32,
    pub cold_start_ms: u64,
    pub route: String,
    pub runtime: Arc<McpServer>,
}

#[derive(Debug, Clone)]
pub struct Deployment {
    pub mode: DeployMode,
    pub functions: Vec<FunctionUnit>,
    routes: BTreeMap<String, usize>,
    sessions: Arc<dyn SessionBackendDebug>,
}

/// `SessionBackend` that can sit inside a `Debug` struct.
pub trait SessionBackendDebug: SessionBackend + std::fmt::Debug {}
impl<T: SessionBackend + std::fmt::Debug> SessionBackendDebug for T {}

pub fn route_for(function: &str) -> String {
    format!("/fn/{function}/mcp")
}

/// Memory of a fused function: the next power of two covering every member.
pub fn monolith_memory(manifests: &[FunctionManifest]) -> u32 {
    let sum: u32 = manifests.iter().map(|m| m.memory_mb).sum();
    sum.max(128).next_power_of_two()
}

impl Deployment {
    pub fn deploy<S>(
        manifests: &[FunctionManifest],
        mode: DeployMode,
        registry: Arc<Registry>,
        sessions: Arc<S>,
    ) -> Result<Self, FaasError>
    where
        S: SessionBackend + std::fmt::Debug + 'static,
    {
        if manifests.is_empty() {
            return Err(FaasError::EmptyDeployment);
        }
        let mut seen = std::collections::HashSet::new();
        for m in manifests {
            m.validate()?;
            if !seen.insert(m.server.as_str()) {
                return Err(FaasError::DuplicateRoute(route_for(&m.server)));
            }
            if !registry.has_server(&m.server) {
                return Err(FaasError::UnknownFunction(m.server.clone()));
            }
        }
        let backend: Arc<dyn SessionBackend> = sessions.clone();
        let functions = match mode {
            DeployMode::Distributed => manifests
                .iter()
                .map(|m| {
                    let runtime = McpServer::single(registry.clone(), &m.server, backend.clone())
                        .map_err(|e| FaasError::InvalidManifest(e.to_string()))?;
                    Ok(FunctionUnit {
                        name: m.server.clone(),
                        servers: vec![m.server.clone()],
                        memory_mb: m.memory_mb,
                        ephemeral_storage_mb: m.ephemeral_storage_mb,
                        cold_start_ms: m.cold_start_ms,
                        route: route_for(&m.server),
                        runtime: Arc::new(runtime),
                    })
                })
                .collect::<Result<Vec<_>, FaasError>>()?,
            DeployMode::Monolithic => {
                let servers: Vec<String> = manifests.iter().map(|m| m.server.clone()).collect();
                let runtime = McpServer::fused(MONOLITH_NAME, registry, &servers, backend)
                    .map_err(|e| FaasError::InvalidManifest(e.to_string()))?;
                vec![FunctionUnit {
                    name: MONOLITH_NAME.into(),
                    servers,
                    memory_mb: monolith_memory(manifests),
                    ephemeral_storage_mb: manifests
                        .iter()
                        .map(|m| m.ephemeral_storage_mb)
                        .max()
                        .unwrap_or(512),
                    cold_start_ms: manifests.iter().map(|m| m.cold_start_ms).max().unwrap_or(0),
                    route: route_for(MONOLITH_NAME),
                    runtime: Arc::new(runtime),
                }]
            }
        };
        let routes = functions
            .iter()
            .enumerate()
            .map(|(i, f)| (f.route.clone(), i))
            .collect();
        Ok(Deployment {
            mode,
            functions,
            routes,
            sessions,
        })
    }

    pub fn route(&self, path: &str) -> Option<&FunctionUnit> {
        self.routes.get(path).map(|&i| &self.functions[i])
    }

    pub fn function(&self, name: &str) -> Option<&FunctionUnit> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Function hosting `server`.
    pub fn function_for_server(&self, server: &str) -> Option<&FunctionUnit> {
        self.functions
            .iter()
            .find(|f| f.servers.iter().any(|s| s == server))
    }

    pub fn routes(&self) -> Vec<String> {
        self.routes.keys().cloned().collect()
    }

    pub fn sessions(&self) -> &dyn SessionBackend {
        &*self.sessions
    }

    /// Deployment manifest for an external deployer.
    pub fn export(&self) -> Value {
        json!({
            "schema": "deployment.v1",
            "mode": self.mode.as_str(),
            "functions": self.functions.iter().map(|f| json!({
                "name": f.name,
                "servers": f.servers,
                "memory_mb": f.memory_mb,
                "ephemeral_storage_mb": f.ephemeral_storage_mb,
                "cold_start_ms": f.cold_start_ms,
                "route": f.route,
            })).collect::<Vec<_>>(),
        })
    }
}
