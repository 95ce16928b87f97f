//! MCP-style tool protocol over JSON-RPC 2.0.
//!
//! Four methods are served: `initialize`, `tools/list`, `tools/call` and
//! `session/delete`. A [`McpServer`] hosts one registry server (or several
//! fused under `server.tool` names) and is reached through a [`Transport`]:
//! in-process, or HTTP POST with the session in the `Mcp-Session-Id` header.

mod client;
pub mod http;
mod registry;
pub mod rpc;
mod server;
mod session;
mod toolbox;
mod transport;

pub use client::McpClient;
pub use registry::{CallContext, Handler, RegisteredTool, Registry, ToolResult};
pub use rpc::{RpcError, RpcId, RpcRequest, RpcResponse};
pub use server::{Envelope, McpServer};
pub use session::{safe_component, LocalSessions, SessionBackend, SessionIds, SessionInfo};
pub use toolbox::{unprefix, ToolBox, ToolExchange};
pub use transport::{decode_http, encode_http, HttpTransport, InProcessTransport, Transport};

pub const SESSION_HEADER: &str = "Mcp-Session-Id";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum McpError {
    #[error("tool {0} already registered")]
    DuplicateTool(String),
    #[error("unknown server {0}")]
    UnknownServer(String),
    #[error("unknown tool {0}")]
    UnknownTool(String),
    #[error("invalid argument `{param}`: {reason}")]
    ArgValidation { param: String, reason: String },
    #[error("session unknown: {0}")]
    SessionUnknown(String),
    #[error("handler failure: {0}")]
    HandlerFailure(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("rpc error {code}: {message}")]
    Rpc { code: i64, message: String },
}
