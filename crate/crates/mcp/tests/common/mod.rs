#![allow(dead_code)]

use std::sync::Arc;

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::{
    http, Handler, HttpTransport, InProcessTransport, LocalSessions, McpServer, Registry,
    SessionIds, ToolResult, Transport,
};
use serde_json::Value;

pub fn registry() -> Registry {
    let mut r = Registry::new();
    let echo: Handler = Arc::new(|_, args| {
        let text = args["text"].as_str().unwrap_or_default();
        let times = args.get("times").and_then(Value::as_u64).unwrap_or(1) as usize;
        Ok(ToolResult::ok(text.repeat(times)))
    });
    r.register_tool(
        ToolDescriptor::new("echo", "echo", "Repeats text.", Origin::Custom)
            .param(ParamSpec::required(
                "text",
                ParamType::String,
                "text to repeat",
            ))
            .param(ParamSpec::optional(
                "times",
                ParamType::Integer,
                "repetitions",
            )),
        echo,
        false,
    )
    .unwrap();
    let fail: Handler = Arc::new(|_, _| Err("no file present in that path".into()));
    r.register_tool(
        ToolDescriptor::new("echo", "fail", "Always fails.", Origin::Custom),
        fail,
        false,
    )
    .unwrap();
    let boom: Handler = Arc::new(|_, _| panic!("kaboom"));
    r.register_tool(
        ToolDescriptor::new("echo", "boom", "Panics.", Origin::Custom),
        boom,
        false,
    )
    .unwrap();
    let write: Handler = Arc::new(|ctx, args| {
        let path = ctx.workspace.join(args["path"].as_str().unwrap());
        std::fs::write(&path, args["content"].as_str().unwrap()).map_err(|e| e.to_string())?;
        Ok(ToolResult::ok("written")
            .with_uris(vec![format!("file:{}", args["path"].as_str().unwrap())]))
    });
    r.register_tool(
        ToolDescriptor::new("files", "write", "Writes a file.", Origin::Custom)
            .param(ParamSpec::required(
                "path",
                ParamType::String,
                "relative path",
            ))
            .param(ParamSpec::required("content", ParamType::String, "text")),
        write,
        true,
    )
    .unwrap();
    r
}

pub fn server(root: &std::path::Path, name: &str, ids: SessionIds) -> Arc<McpServer> {
    let sessions = Arc::new(LocalSessions::new(root, ids));
    Arc::new(McpServer::single(Arc::new(registry()), name, sessions).unwrap())
}

pub fn in_process(server: Arc<McpServer>) -> Arc<dyn Transport> {
    Arc::new(InProcessTransport::new(server))
}

/// Serves `server` at `/mcp` on an ephemeral port.
pub fn over_http(server: Arc<McpServer>) -> (http::HttpServerHandle, Arc<dyn Transport>) {
    let handle = http::serve(
        "127.0.0.1:0",
        Arc::new(move |req: http::HttpRequest| {
            if req.path == "/mcp" {
                server.handle_http(&req)
            } else {
                http::HttpResponse::text(404, "not found")
            }
        }),
    )
    .unwrap();
    let url = format!("{}/mcp", handle.base_url());
    (handle, Arc::new(HttpTransport::new(&url)))
}
