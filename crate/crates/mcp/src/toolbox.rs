//! The tool surface one run sees: every connected server's tools under
//! their bare names, with traced calls.

use std::sync::Arc;

use agentx_core::{digest_json, Actor, ToolDescriptor, Tracer};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::client::McpClient;
use crate::registry::ToolResult;
use crate::transport::Transport;
use crate::McpError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolExchange {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    pub server: String,
    pub tool: String,
    pub args: Map<String, Value>,
    pub result: ToolResult,
}

#[derive(Debug)]
struct Entry {
    descriptor: ToolDescriptor,
    wire_name: String,
    client: usize,
}

#[derive(Debug)]
pub struct ToolBox {
    clients: Vec<McpClient>,
    entries: Vec<Entry>,
    tracer: Tracer,
    log: Vec<ToolExchange>,
}

/// Strips a fused `server.tool` name back to the tool's own name.
pub fn unprefix(d: &ToolDescriptor) -> ToolDescriptor {
    let name = d
        .name
        .strip_prefix(&format!("{}.", d.server))
        .unwrap_or(&d.name)
        .to_string();
    ToolDescriptor { name, ..d.clone() }
}

impl ToolBox {
    /// Opens one session per endpoint for `app_instance` and collects tools.
    pub fn connect(
        transports: Vec<Arc<dyn Transport>>,
        app_instance: &str,
        tracer: Tracer,
    ) -> Result<Self, McpError> {
        let mut clients = Vec::new();
        let mut entries = Vec::new();
        for (i, t) in transports.into_iter().enumerate() {
            let mut c = McpClient::new(t);
            c.initialize(app_instance)?;
            for d in c.list_tools()? {
                entries.push(Entry {
                    descriptor: unprefix(&d),
                    wire_name: d.name,
                    client: i,
                });
            }
            clients.push(c);
        }
        Ok(ToolBox {
            clients,
            entries,
            tracer,
            log: Vec::new(),
        })
    }

    pub fn descriptors(&self) -> Vec<ToolDescriptor> {
        self.entries.iter().map(|e| e.descriptor.clone()).collect()
    }

    fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.descriptor.name == name || e.descriptor.qualified_name() == name)
    }

    /// Looks up a tool by bare (`fetch`) or qualified (`fetch.fetch`) name.
    pub fn find(&self, name: &str) -> Option<&ToolDescriptor> {
        self.entry(name).map(|e| &e.descriptor)
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.clients
            .iter()
            .filter_map(|c| c.session_id().map(str::to_string))
            .collect()
    }

    /// Calls a tool. Protocol-level failures come back as error results so
    /// the caller can feed them to the model.
    pub fn call(&mut self, name: &str, args: Map<String, Value>) -> ToolResult {
        let Some(entry) = self.entry(name) else {
            return ToolResult::error(format!("Error: unknown tool `{name}`"));
        };
        let server = entry.descriptor.server.clone();
        let tool = entry.descriptor.name.clone();
        let wire = entry.wire_name.clone();
        let client = &self.clients[entry.client];

        let span = self.tracer.begin();
        let result = match client.call_tool(&wire, args.clone()) {
            Ok(r) => r,
            Err(McpError::ArgValidation { param, reason }) => {
                ToolResult::error(format!("Error: invalid argument `{param}`: {reason}"))
            }
            Err(e) => ToolResult::error(format!("Error: {e}")),
        };
        let digest = digest_json(&json!({
            "server": server,
            "tool": tool,
            "args": args,
            "content": result.content,
            "is_error": result.is_error,
        }));
        let seq = self
            .tracer
            .finish(span, Actor::tool(&server, &tool), None, (0, 0), digest);
        self.log.push(ToolExchange {
            seq,
            stage: self.tracer.stage(),
            server,
            tool,
            args,
            result: result.clone(),
        });
        result
    }

    pub fn exchanges(&self) -> &[ToolExchange] {
        &self.log
    }

    /// Deletes every session; returns how many were deleted.
    pub fn close(&mut self) -> usize {
        self.clients
            .iter_mut()
            .filter(|c| c.session_id().is_some())
            .map(|c| c.close())
            .filter(Result::is_ok)
            .count()
    }

    pub fn into_exchanges(mut self) -> Vec<ToolExchange> {
        std::mem::take(&mut self.log)
    }
}
