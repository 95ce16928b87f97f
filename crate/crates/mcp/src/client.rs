use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use agentx_core::ToolDescriptor;
use serde_json::{json, Map, Value};

use crate::registry::ToolResult;
use crate::rpc::*;
use crate::transport::Transport;
use crate::McpError;

/// Client bound to one server endpoint and, after `initialize`, one session.
pub struct McpClient {
    transport: Arc<dyn Transport>,
    session: Option<String>,
    next_id: AtomicI64,
}

impl std::fmt::Debug for McpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("McpClient")
            .field("transport", &self.transport.describe())
            .field("session", &self.session)
            .finish()
    }
}

fn map_error(e: RpcError) -> McpError {
    let field = |k: &str| {
        e.data
            .as_ref()
            .and_then(|d| d.get(k))
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string()
    };
    match e.kind() {
        Some("session_unknown") => McpError::SessionUnknown(e.message),
        Some("unknown_tool") => McpError::UnknownTool(field("tool")),
        Some("arg_validation") => McpError::ArgValidation {
            param: field("param"),
            reason: field("reason"),
        },
        Some("handler_panic") | Some("store_unavailable") => McpError::HandlerFailure(e.message),
        _ => McpError::Rpc {
            code: e.code,
            message: e.message,
        },
    }
}

impl McpClient {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        McpClient {
            transport,
            session: None,
            next_id: AtomicI64::new(1),
        }
    }

    pub fn session_id(&self) -> Option<&str> {
        self.session.as_deref()
    }

    pub fn transport(&self) -> &Arc<dyn Transport> {
        &self.transport
    }

    /// Sends one request and returns the raw response.
    pub fn raw(&self, method: &str, params: Value) -> Result<RpcResponse, McpError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let req = RpcRequest::new(id, method, params);
        let env = self.transport.roundtrip(&req, self.session.as_deref())?;
        if env.response.id != req.id {
            return Err(McpError::MalformedResponse(format!(
                "response id {:?} does not echo request id {:?}",
                env.response.id, req.id
            )));
        }
        Ok(env.response)
    }

    fn request(&self, method: &str, params: Value) -> Result<Value, McpError> {
        let resp = self.raw(method, params)?;
        match (resp.result, resp.error) {
            (Some(r), None) => Ok(r),
            (None, Some(e)) => Err(map_error(e)),
            _ => Err(McpError::MalformedResponse("result xor error".into())),
        }
    }

    pub fn initialize(&mut self, app_instance: &str) -> Result<String, McpError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let req = RpcRequest::new(id, INITIALIZE, json!({"app_instance": app_instance}));
        let env = self.transport.roundtrip(&req, None)?;
        let result = match (env.response.result, env.response.error) {
            (Some(r), None) => r,
            (None, Some(e)) => return Err(map_error(e)),
            _ => return Err(McpError::MalformedResponse("result xor error".into())),
        };
        let sid = env
            .session_id
            .or_else(|| {
                result
                    .get("sessionId")
                    .and_then(Value::as_str)
                    .map(str::to_string)
            })
            .ok_or_else(|| McpError::MalformedResponse("initialize returned no session".into()))?;
        self.session = Some(sid.clone());
        Ok(sid)
    }

    /// Descriptors exactly as the server advertises them.
    pub fn list_tools(&self) -> Result<Vec<ToolDescriptor>, McpError> {
        let r = self.request(TOOLS_LIST, json!({}))?;
        r.get("tools")
            .and_then(Value::as_array)
            .ok_or_else(|| McpError::MalformedResponse("tools/list without tools".into()))?
            .iter()
            .map(|t| ToolDescriptor::from_wire(t).map_err(McpError::MalformedResponse))
            .collect()
    }

    pub fn call_tool(&self, name: &str, args: Map<String, Value>) -> Result<ToolResult, McpError> {
        let r = self.request(TOOLS_CALL, json!({"name": name, "arguments": args}))?;
        ToolResult::from_wire(&r)
    }

    /// Ends the session on the server.
    pub fn close(&mut self) -> Result<(), McpError> {
        if self.session.is_none() {
            return Ok(());
        }
        let out = self.request(SESSION_DELETE, json!({}));
        self.session = None;
        out.map(|_| ())
    }
}
