//! Server runtime: dispatches JSON-RPC requests against a registry.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use agentx_core::ToolDescriptor;
use serde_json::{json, Map, Value};

use crate::http::{HttpRequest, HttpResponse};
use crate::registry::{CallContext, RegisteredTool, Registry};
use crate::rpc::*;
use crate::session::{SessionBackend, SessionInfo};
use crate::{McpError, SESSION_HEADER};

/// Response plus the session id carried outside the JSON-RPC body
/// (HTTP header or in-process field).
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub response: RpcResponse,
    pub session_id: Option<String>,
}

/// One hosted unit: a single MCP server, or several fused into one with
/// `server.tool` names.
pub struct McpServer {
    name: String,
    registry: Arc<Registry>,
    servers: Vec<String>,
    fused: bool,
    sessions: Arc<dyn SessionBackend>,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl std::fmt::Debug for McpServer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("McpServer")
            .field("name", &self.name)
            .field("servers", &self.servers)
            .field("fused", &self.fused)
            .finish()
    }
}

impl McpServer {
    pub fn single(
        registry: Arc<Registry>,
        server: &str,
        sessions: Arc<dyn SessionBackend>,
    ) -> Result<Self, McpError> {
        if !registry.has_server(server) {
            return Err(McpError::UnknownServer(server.to_string()));
        }
        Ok(McpServer {
            name: server.to_string(),
            registry,
            servers: vec![server.to_string()],
            fused: false,
            sessions,
            locks: Mutex::default(),
        })
    }

    pub fn fused(
        name: &str,
        registry: Arc<Registry>,
        servers: &[String],
        sessions: Arc<dyn SessionBackend>,
    ) -> Result<Self, McpError> {
        if let Some(s) = servers.iter().find(|s| !registry.has_server(s)) {
            return Err(McpError::UnknownServer(s.clone()));
        }
        Ok(McpServer {
            name: name.to_string(),
            registry,
            servers: servers.to_vec(),
            fused: true,
            sessions,
            locks: Mutex::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_fused(&self) -> bool {
        self.fused
    }

    pub fn hosted_servers(&self) -> &[String] {
        &self.servers
    }

    pub fn sessions(&self) -> &Arc<dyn SessionBackend> {
        &self.sessions
    }

    fn wire_name(&self, d: &ToolDescriptor) -> String {
        if self.fused {
            d.qualified_name()
        } else {
            d.name.clone()
        }
    }

    /// Descriptors as advertised, with fused names prefixed.
    pub fn descriptors(&self) -> Vec<ToolDescriptor> {
        self.servers
            .iter()
            .flat_map(|s| self.registry.tools(s))
            .map(|t| ToolDescriptor {
                name: self.wire_name(&t.descriptor),
                ..t.descriptor.clone()
            })
            .collect()
    }

    fn resolve(&self, wire_name: &str) -> Option<&RegisteredTool> {
        if self.fused {
            let (server, tool) = wire_name.split_once('.')?;
            if !self.servers.iter().any(|s| s == server) {
                return None;
            }
            self.registry.get(server, tool)
        } else {
            self.registry.get(&self.servers[0], wire_name)
        }
    }

    fn session(&self, session: Option<&str>) -> Option<SessionInfo> {
        self.sessions
            .get(session?)
            .filter(|info| info.server == self.name)
    }

    pub fn handle(&self, req: &RpcRequest, session: Option<&str>) -> Envelope {
        let id = req.id.clone();
        let plain = |response| Envelope {
            response,
            session_id: None,
        };
        if req.jsonrpc != "2.0" {
            return plain(RpcResponse::err(
                id,
                RpcError::new(INVALID_REQUEST, "jsonrpc must be \"2.0\""),
            ));
        }
        match req.method.as_str() {
            INITIALIZE => self.initialize(id, &req.params),
            TOOLS_LIST => plain(match self.session(session) {
                None => unknown_session(id, session),
                Some(_) => {
                    let tools: Vec<Value> = self
                        .servers
                        .iter()
                        .flat_map(|s| self.registry.tools(s))
                        .map(|t| {
                            let mut w = t.descriptor.to_wire();
                            w["name"] = Value::String(self.wire_name(&t.descriptor));
                            w
                        })
                        .collect();
                    RpcResponse::ok(id, json!({"tools": tools}))
                }
            }),
            TOOLS_CALL => plain(match self.session(session) {
                None => unknown_session(id, session),
                Some(info) => self.call(id, &req.params, &info),
            }),
            SESSION_DELETE => plain(match self.session(session) {
                Some(info) if self.sessions.delete(&info.session_id) => {
                    RpcResponse::ok(id, json!({}))
                }
                _ => unknown_session(id, session),
            }),
            other => plain(RpcResponse::err(
                id,
                RpcError::new(METHOD_NOT_FOUND, format!("method not found: {other}")),
            )),
        }
    }

    fn initialize(&self, id: RpcId, params: &Value) -> Envelope {
        let app = params
            .get("app_instance")
            .and_then(Value::as_str)
            .unwrap_or("default");
        match self.sessions.create(&self.name, app) {
            Ok(info) => Envelope {
                response: RpcResponse::ok(
                    id,
                    json!({
                        "protocolVersion": PROTOCOL_VERSION,
                        "serverInfo": {"name": self.name},
                        "capabilities": {"tools": {}},
                        "sessionId": info.session_id,
                    }),
                ),
                session_id: Some(info.session_id),
            },
            Err(e) => Envelope {
                response: RpcResponse::err(
                    id,
                    RpcError::new(HANDLER_FAILURE, format!("session store unavailable: {e}"))
                        .with_data(json!({"kind": "store_unavailable"})),
                ),
                session_id: None,
            },
        }
    }

    fn call(&self, id: RpcId, params: &Value, info: &SessionInfo) -> RpcResponse {
        let Some(name) = params.get("name").and_then(Value::as_str) else {
            return RpcResponse::err(
                id,
                RpcError::new(INVALID_PARAMS, "tools/call requires a tool name"),
            );
        };
        let args: Map<String, Value> = match params.get("arguments") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => {
                return RpcResponse::err(
                    id,
                    RpcError::new(INVALID_PARAMS, "arguments must be an object"),
                )
            }
        };
        let Some(tool) = self.resolve(name) else {
            return RpcResponse::err(
                id,
                RpcError::new(INVALID_PARAMS, format!("unknown tool: {name}"))
                    .with_data(json!({"kind": "unknown_tool", "tool": name})),
            );
        };
        if let Err((param, reason)) = tool.descriptor.validate_args(&args) {
            return RpcResponse::err(
                id,
                RpcError::new(
                    INVALID_PARAMS,
                    format!("invalid argument `{param}`: {reason}"),
                )
                .with_data(json!({"kind": "arg_validation", "param": param, "reason": reason})),
            );
        }
        let ctx = CallContext {
            session_id: info.session_id.clone(),
            app_instance: info.app_instance.clone(),
            server: tool.descriptor.server.clone(),
            workspace: info.workspace.clone(),
        };
        let guard = tool.exclusive.then(|| self.workspace_lock(&info.workspace));
        let _held = guard
            .as_ref()
            .map(|m| m.lock().unwrap_or_else(|e| e.into_inner()));
        let outcome = catch_unwind(AssertUnwindSafe(|| (tool.handler)(&ctx, &args)));
        match outcome {
            Ok(Ok(result)) => RpcResponse::ok(id, result.to_wire()),
            Ok(Err(cause)) => RpcResponse::ok(id, crate::ToolResult::error(cause).to_wire()),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "handler panicked".into());
                RpcResponse::err(
                    id,
                    RpcError::new(HANDLER_FAILURE, format!("handler failure: {msg}"))
                        .with_data(json!({"kind": "handler_panic"})),
                )
            }
        }
    }

    fn workspace_lock(&self, ws: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(ws.to_path_buf()).or_default().clone()
    }

    /// HTTP mapping: `POST` carries a JSON-RPC body, `DELETE` ends the
    /// session named in the header.
    pub fn handle_http(&self, req: &HttpRequest) -> HttpResponse {
        let session = req.header(SESSION_HEADER);
        match req.method.as_str() {
            "DELETE" => match self.session(session) {
                Some(info) if self.sessions.delete(&info.session_id) => {
                    HttpResponse::json(200, &json!({}))
                }
                _ => HttpResponse::json(404, &json!({"error": "unknown session"})),
            },
            "POST" => {
                let rpc: RpcRequest = match serde_json::from_slice(&req.body) {
                    Ok(r) => r,
                    Err(e) => {
                        return HttpResponse::json(
                            400,
                            &json!({
                                "jsonrpc": "2.0",
                                "id": null,
                                "error": {"code": PARSE_ERROR, "message": e.to_string()},
                            }),
                        )
                    }
                };
                let env = self.handle(&rpc, session);
                let status = match env.response.error.as_ref().and_then(|e| e.kind()) {
                    Some("handler_panic") => 500,
                    _ => 200,
                };
                let mut resp = HttpResponse::json(status, &env.response);
                if let Some(sid) = env.session_id {
                    resp.headers.push((SESSION_HEADER.to_string(), sid));
                }
                resp
            }
            _ => HttpResponse::json(405, &json!({"error": "method not allowed"})),
        }
    }
}
