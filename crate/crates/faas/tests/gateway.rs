use std::sync::Arc;

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_faas::*;
use agentx_mcp::http::HttpRequest;
use agentx_mcp::{Handler, McpClient, McpError, Registry, SessionIds, ToolResult};
use serde_json::{json, Map, Value};

/// One stub tool per Table-1 server; `put` writes into the session workspace.
fn registry() -> Registry {
    let mut r = Registry::new();
    for m in builtin_manifests() {
        let server = m.server.clone();
        let h: Handler = Arc::new(move |_ctx, args| {
            Ok(ToolResult::ok(format!(
                "{}:{}",
                server,
                args["x"].as_str().unwrap_or("")
            )))
        });
        r.register_tool(
            ToolDescriptor::new(&m.server, "ping", "Echoes x.", Origin::Custom)
                .param(ParamSpec::required("x", ParamType::String, "payload")),
            h,
            false,
        )
        .unwrap();
        let put: Handler = Arc::new(|ctx, args| {
            let p = ctx.workspace.join(args["path"].as_str().unwrap());
            std::fs::write(&p, args["data"].as_str().unwrap()).map_err(|e| e.to_string())?;
            Ok(ToolResult::ok("ok"))
        });
        let get: Handler = Arc::new(|ctx, args| {
            std::fs::read_to_string(ctx.workspace.join(args["path"].as_str().unwrap()))
                .map(ToolResult::ok)
                .map_err(|e| e.to_string())
        });
        r.register_tool(
            ToolDescriptor::new(&m.server, "put", "Writes.", Origin::Custom)
                .param(ParamSpec::required("path", ParamType::String, "p"))
                .param(ParamSpec::required("data", ParamType::String, "d")),
            put,
            true,
        )
        .unwrap();
        r.register_tool(
            ToolDescriptor::new(&m.server, "get", "Reads.", Origin::Custom)
                .param(ParamSpec::required("path", ParamType::String, "p")),
            get,
            true,
        )
        .unwrap();
    }
    r
}

fn gateway(dir: &std::path::Path, mode: DeployMode) -> Arc<Gateway> {
    let sessions = Arc::new(FaasSessions::new(
        Arc::new(MemoryStore::new()),
        dir.join("tmp"),
        SessionIds::Random,
    ));
    let d = Deployment::deploy(&builtin_manifests(), mode, Arc::new(registry()), sessions).unwrap();
    Arc::new(Gateway::new(d, default_gb_s_rate()))
}

fn args(v: Value) -> Map<String, Value> {
    v.as_object().unwrap().clone()
}

#[test]
fn distributed_has_eight_routes_monolithic_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = gateway(dir.path(), DeployMode::Distributed);
    assert_eq!(d.deployment().routes().len(), 8);
    assert!(d
        .deployment()
        .routes()
        .contains(&"/fn/code_executor/mcp".to_string()));
    let m = gateway(dir.path(), DeployMode::Monolithic);
    assert_eq!(
        m.deployment().routes(),
        vec!["/fn/monolith/mcp".to_string()]
    );
    assert_eq!(m.deployment().functions[0].memory_mb, 4096);
    let export = m.deployment().export();
    assert_eq!(
        export["functions"][0]["servers"].as_array().unwrap().len(),
        8
    );
}

#[test]
fn deploy_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sessions = Arc::new(FaasSessions::new(
        Arc::new(MemoryStore::new()),
        dir.path(),
        SessionIds::Random,
    ));
    let reg = Arc::new(registry());
    assert_eq!(
        Deployment::deploy(&[], DeployMode::Distributed, reg.clone(), sessions.clone())
            .unwrap_err(),
        FaasError::EmptyDeployment
    );
    let dup = vec![
        FunctionManifest::new("fetch", 256),
        FunctionManifest::new("fetch", 256),
    ];
    assert!(matches!(
        Deployment::deploy(&dup, DeployMode::Distributed, reg.clone(), sessions.clone()),
        Err(FaasError::DuplicateRoute(_))
    ));
    let bad = vec![FunctionManifest::new("fetch", 300)];
    assert!(matches!(
        Deployment::deploy(&bad, DeployMode::Distributed, reg, sessions),
        Err(FaasError::InvalidManifest(_))
    ));
}

#[test]
fn invocation_is_metered_with_function_memory() {
    let dir = tempfile::tempdir().unwrap();
    let gw = gateway(dir.path(), DeployMode::Distributed);
    let mut c = McpClient::new(Arc::new(gw.transport("code_executor").unwrap()));
    c.initialize("app").unwrap();
    let before = gw.meter().records().len();
    c.call_tool("ping", args(json!({"x": "1"}))).unwrap();
    let recs = gw.meter().records();
    assert_eq!(recs.len(), before + 1);
    let last = recs.last().unwrap();
    assert_eq!(last.memory_mb, 512);
    assert!(last.duration_ms >= 1);
    assert_eq!(
        last.billed_usd,
        faas_cost(last.duration_ms, 512, default_gb_s_rate())
    );
    assert_eq!(gw.meter().total(), recs.iter().map(|r| r.billed_usd).sum());
}

#[test]
fn unknown_route_is_404_without_record() {
    let dir = tempfile::tempdir().unwrap();
    let gw = gateway(dir.path(), DeployMode::Distributed);
    let (resp, rec) = gw.invoke(&HttpRequest::post("/fn/nope/mcp", b"{}".to_vec()));
    assert_eq!(resp.status, 404);
    assert!(rec.is_none());
    assert!(gw.meter().records().is_empty());
}

#[test]
fn session_lifecycle_through_gateway() {
    let dir = tempfile::tempdir().unwrap();
    let gw = gateway(dir.path(), DeployMode::Distributed);
    let a = gw.initialize_session("fetch", "one").unwrap();
    let b = gw.initialize_session("fetch", "two").unwrap();
    assert_ne!(a, b);
    assert_eq!(gw.deployment().sessions().list().len(), 2);
    gw.delete_session("fetch", &a).unwrap();
    assert_eq!(
        gw.delete_session("fetch", &a),
        Err(FaasError::SessionUnknown(a.clone()))
    );
    assert!(matches!(
        gw.initialize_session("nope", "x"),
        Err(FaasError::UnknownFunction(_))
    ));
}

#[test]
fn stale_session_call_fails() {
    let dir = tempfile::tempdir().unwrap();
    let gw = gateway(dir.path(), DeployMode::Distributed);
    let mut c = McpClient::new(Arc::new(gw.transport("fetch").unwrap()));
    let sid = c.initialize("app").unwrap();
    gw.delete_session("fetch", &sid).unwrap();
    assert!(matches!(
        c.call_tool("ping", args(json!({"x": "1"}))),
        Err(McpError::SessionUnknown(_))
    ));
}

#[test]
fn distributed_and_monolithic_return_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |mode| {
        let gw = gateway(dir.path(), mode);
        let tracer = agentx_core::Tracer::new("r", Arc::new(agentx_core::LogicalClock::new(1)));
        let mut tb = agentx_mcp::ToolBox::connect(gw.transports(), "app", tracer).unwrap();
        let mut out = Vec::new();
        for m in builtin_manifests() {
            let qualified = format!("{}.ping", m.server);
            out.push(tb.call(&qualified, args(json!({"x": m.server}))));
            out.push(tb.call(
                &format!("{}.put", m.server),
                args(json!({"path": "f", "data": "d"})),
            ));
            out.push(tb.call(&format!("{}.get", m.server), args(json!({"path": "f"}))));
        }
        let mut descs: Vec<String> = tb
            .descriptors()
            .iter()
            .map(|d| serde_json::to_string(d).unwrap())
            .collect();
        descs.sort();
        tb.close();
        assert!(gw.deployment().sessions().list().is_empty());
        (out, descs)
    };
    assert_eq!(run(DeployMode::Distributed), run(DeployMode::Monolithic));
}

#[test]
fn interleaved_sessions_never_see_each_other() {
    let dir = tempfile::tempdir().unwrap();
    let gw = gateway(dir.path(), DeployMode::Distributed);
    let mut a = McpClient::new(Arc::new(gw.transport("filesystem").unwrap()));
    let mut b = McpClient::new(Arc::new(gw.transport("filesystem").unwrap()));
    a.initialize("app-a").unwrap();
    b.initialize("app-b").unwrap();
    for i in 0..20 {
        a.call_tool(
            "put",
            args(json!({"path": "same.txt", "data": format!("a{i}")})),
        )
        .unwrap();
        b.call_tool(
            "put",
            args(json!({"path": "same.txt", "data": format!("b{i}")})),
        )
        .unwrap();
        assert_eq!(
            a.call_tool("get", args(json!({"path": "same.txt"})))
                .unwrap()
                .content,
            format!("a{i}")
        );
        assert_eq!(
            b.call_tool("get", args(json!({"path": "same.txt"})))
                .unwrap()
                .content,
            format!("b{i}")
        );
    }
}
