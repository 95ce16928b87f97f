use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use agentx_core::ToolDescriptor;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::McpError;

/// Outcome of one tool invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolResult {
    pub content: String,
    pub is_error: bool,
    #[serde(default)]
    pub produced_uris: Vec<String>,
}

impl ToolResult {
    pub fn ok(content: impl Into<String>) -> Self {
        ToolResult {
            content: content.into(),
            is_error: false,
            produced_uris: Vec::new(),
        }
    }

    pub fn error(cause: impl Into<String>) -> Self {
        ToolResult {
            content: cause.into(),
            is_error: true,
            produced_uris: Vec::new(),
        }
    }

    pub fn with_uris(mut self, uris: Vec<String>) -> Self {
        self.produced_uris = uris;
        self
    }

    /// `tools/call` result body.
    pub fn to_wire(&self) -> Value {
        json!({
            "content": [{"type": "text", "text": self.content}],
            "isError": self.is_error,
            "producedUris": self.produced_uris,
        })
    }

    pub fn from_wire(v: &Value) -> Result<Self, McpError> {
        let bad = |m: &str| McpError::MalformedResponse(m.to_string());
        let parts = v
            .get("content")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("tool result without content"))?;
        let content = parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join("");
        let is_error = v.get("isError").and_then(Value::as_bool).unwrap_or(false);
        let produced_uris = v
            .get("producedUris")
            .and_then(Value::as_array)
            .map(|a| {
                a.iter()
                    .filter_map(|u| u.as_str().map(str::to_string))
                    .collect()
            })
            .unwrap_or_default();
        Ok(ToolResult {
            content,
            is_error,
            produced_uris,
        })
    }
}

/// What a handler knows about the call it serves.
#[derive(Debug, Clone)]
pub struct CallContext {
    pub session_id: String,
    pub app_instance: String,
    pub server: String,
    pub workspace: PathBuf,
}

/// Handler failures become `is_error` results, never protocol errors.
pub type Handler =
    Arc<dyn Fn(&CallContext, &Map<String, Value>) -> Result<ToolResult, String> + Send + Sync>;

#[derive(Clone)]
pub struct RegisteredTool {
    pub descriptor: ToolDescriptor,
    pub handler: Handler,
    /// Calls are serialized per session workspace.
    pub exclusive: bool,
}

impl std::fmt::Debug for RegisteredTool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegisteredTool")
            .field("descriptor", &self.descriptor.qualified_name())
            .field("exclusive", &self.exclusive)
            .finish()
    }
}

/// Server name -> tool name -> (descriptor, handler).
#[derive(Debug, Clone, Default)]
pub struct Registry {
    servers: BTreeMap<String, Vec<RegisteredTool>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_tool(
        &mut self,
        descriptor: ToolDescriptor,
        handler: Handler,
        exclusive: bool,
    ) -> Result<(), McpError> {
        let tools = self.servers.entry(descriptor.server.clone()).or_default();
        if tools.iter().any(|t| t.descriptor.name == descriptor.name) {
            return Err(McpError::DuplicateTool(descriptor.qualified_name()));
        }
        tools.push(RegisteredTool {
            descriptor,
            handler,
            exclusive,
        });
        Ok(())
    }

    /// Registers a server with no tools yet, so it is listed.
    pub fn add_server(&mut self, server: &str) {
        self.servers.entry(server.to_string()).or_default();
    }

    pub fn server_names(&self) -> Vec<String> {
        self.servers.keys().cloned().collect()
    }

    pub fn has_server(&self, server: &str) -> bool {
        self.servers.contains_key(server)
    }

    /// Tools of one server, in registration order.
    pub fn tools(&self, server: &str) -> &[RegisteredTool] {
        self.servers.get(server).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn get(&self, server: &str, name: &str) -> Option<&RegisteredTool> {
        self.tools(server)
            .iter()
            .find(|t| t.descriptor.name == name)
    }

    pub fn descriptors(&self) -> Vec<ToolDescriptor> {
        self.servers
            .values()
            .flatten()
            .map(|t| t.descriptor.clone())
            .collect()
    }

    /// Subset containing only the named servers.
    pub fn restrict(&self, servers: &[&str]) -> Registry {
        Registry {
            servers: self
                .servers
                .iter()
                .filter(|(k, _)| servers.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}
