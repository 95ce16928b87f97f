//! Local emulation of serverless MCP hosting.
//!
//! Servers from an [`agentx_mcp::Registry`] are deployed as function units,
//! either one per server ([`DeployMode::Distributed`]) or fused into one
//! ([`DeployMode::Monolithic`]). A [`Gateway`] routes `/fn/<name>/mcp`
//! requests, persists sessions through a [`SessionStore`], gives every
//! session a private workspace, and bills each invocation in GB-seconds.

mod blob;
mod cost;
mod deploy;
mod gateway;
mod manifest;
mod meter;
mod store;

pub use blob::{BlobError, BlobStore, BlobUri};
pub use cost::{billed_ms, default_gb_s_rate, faas_cost};
pub use deploy::{monolith_memory, route_for, DeployMode, Deployment, FunctionUnit, MONOLITH_NAME};
pub use gateway::{FaasTransport, Gateway};
pub use manifest::{builtin_manifests, parse_manifests, valid_memory, FunctionManifest};
pub use meter::{InvocationRecord, Meter, MeterDump, METER_SCHEMA};
pub use store::{FaasSessions, FileStore, MemoryStore, SessionStore};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FaasError {
    #[error("deployment has no functions")]
    EmptyDeployment,
    #[error("duplicate route {0}")]
    DuplicateRoute(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("session unknown: {0}")]
    SessionUnknown(String),
    #[error("session store unavailable: {0}")]
    StoreUnavailable(String),
}
