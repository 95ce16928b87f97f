use std::sync::Arc;

use agentx_core::{LogicalClock, Tracer};
use agentx_llm::estimate_tokens;
use agentx_mcp::{
    InProcessTransport, LocalSessions, McpServer, SessionIds, ToolBox, ToolResult, Transport,
};
use agentx_toolpack::fetch::{fixture_page, split_notice, truncation_notice};
use agentx_toolpack::fixtures::FixtureSet;
use agentx_toolpack::search::{fixture_results, render, SearchIndexEntry};
use agentx_toolpack::stocks::{fixture_series, UNIVERSE};
use agentx_toolpack::*;
use serde_json::{json, Map, Value};

struct Host {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    cfg: ToolpackConfig,
    tb: ToolBox,
}

fn host(profile: Profile, app: &str) -> Host {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ToolpackConfig::new(profile, dir.path().join("blobs"));
    host_with(dir, cfg, app)
}

fn host_with(dir: tempfile::TempDir, cfg: ToolpackConfig, app: &str) -> Host {
    let root = dir.path().join("ws");
    let reg = Arc::new(build_registry(&cfg));
    let sessions = Arc::new(LocalSessions::new(&root, SessionIds::sequential("s")));
    let transports: Vec<Arc<dyn Transport>> = SERVERS
        .iter()
        .map(|s| {
            Arc::new(InProcessTransport::new(Arc::new(
                McpServer::single(reg.clone(), s, sessions.clone()).unwrap(),
            ))) as Arc<dyn Transport>
        })
        .collect();
    let tracer = Tracer::new("t", Arc::new(LogicalClock::new(1)));
    let tb = ToolBox::connect(transports, app, tracer).unwrap();
    Host {
        root: root.join(app),
        _dir: dir,
        cfg,
        tb,
    }
}

fn args(v: Value) -> Map<String, Value> {
    v.as_object().unwrap().clone()
}

fn ok(r: &ToolResult) -> &str {
    assert!(!r.is_error, "unexpected error: {}", r.content);
    &r.content
}

#[test]
fn registry_has_eight_servers_with_hints() {
    let local = build_registry(&ToolpackConfig::new(Profile::Local, "/tmp/unused"));
    assert_eq!(local.server_names().len(), 8);
    let fetch = local.get("fetch", "fetch").unwrap();
    assert!(fetch.descriptor.description.starts_with(
        "Fetches a URL from the internet and optionally extracts its contents as markdown."
    ));
    assert!(fetch.descriptor.description.ends_with(
        "Use this tool after using the Google Search tool, when you need more detailed information from a specific web page."
    ));
    assert!(local
        .get("arxiv", "load_article_to_context")
        .unwrap()
        .descriptor
        .description
        .ends_with(
            "This tool should never be used to load research papers since they are too long."
        ));
    let faas = build_registry(&ToolpackConfig::new(Profile::Faas, "/tmp/unused"));
    assert!(!faas
        .get("fetch", "fetch")
        .unwrap()
        .descriptor
        .description
        .contains("Google Search"));
    let rag = &faas.get("rag", "document_retriever").unwrap().descriptor;
    assert!(rag
        .description
        .starts_with("Retrieves relevant text snippets from a PDF in S3 based on a query."));
    assert!(rag.param_spec("s3_uri").is_some());
}

#[test]
fn search_fixture_corpus() {
    let fx = FixtureSet::new(default_fixture_root());
    let index: Vec<SearchIndexEntry> = fx.read_json("serper", "index.json").unwrap();
    assert_eq!(index.len(), 3);
    for e in &index {
        let results = fixture_results(&fx, &e.query).unwrap();
        assert_eq!(results.len(), 8);
        let tokens = estimate_tokens(&render(&results));
        assert!(
            (800..=950).contains(&tokens),
            "{} -> {tokens} tokens",
            e.query
        );
        for r in &results {
            assert!(!r.snippet.is_empty());
            assert_eq!(fixture_page(&fx, &r.link).unwrap().chars().count(), 12_000);
        }
    }
}

#[test]
fn google_search_truncates_and_validates() {
    let mut h = host(Profile::Local, "app");
    let r = h.tb.call(
        "google_search",
        args(json!({"query": "Edge devices and their real-world use cases in 2025", "num_results": 5})),
    );
    let v: Value = serde_json::from_str(ok(&r)).unwrap();
    assert_eq!(v["organic"].as_array().unwrap().len(), 5);
    let fuzzy = h.tb.call(
        "google_search",
        args(json!({"query": "edge devices use cases"})),
    );
    assert_eq!(
        serde_json::from_str::<Value>(ok(&fuzzy)).unwrap()["organic"]
            .as_array()
            .unwrap()
            .len(),
        8
    );
    let zero = h.tb.call(
        "google_search",
        args(json!({"query": "edge devices", "num_results": 0})),
    );
    assert!(zero.is_error && zero.content.contains("num_results"));
    let none = h.tb.call(
        "google_search",
        args(json!({"query": "medieval pottery glazes"})),
    );
    assert!(none.is_error && none.content.contains("no fixture"));
}

#[test]
fn fetch_paginates_fixture_pages() {
    let mut h = host(Profile::Local, "app");
    let fx = FixtureSet::new(default_fixture_root());
    let url = &fixture_results(
        &fx,
        "Recent advancements in quantum computing hardware development",
    )
    .unwrap()[0]
        .link;
    let page = fixture_page(&fx, url).unwrap();
    let first = h.tb.call("fetch", args(json!({"url": url})));
    assert!(ok(&first).ends_with(&truncation_notice(5000)));
    assert_eq!(split_notice(&first.content), (&page[..5000], Some(5000)));
    let last =
        h.tb.call("fetch", args(json!({"url": url, "start_index": 10000})));
    assert_eq!(ok(&last), &page[10000..]);
    let missing =
        h.tb.call("fetch", args(json!({"url": "https://nowhere.example/x"})));
    assert!(missing.is_error && missing.content.contains("not found"));
}

#[test]
fn arxiv_download_and_rag() {
    let mut h = host(Profile::Local, "app");
    let title = "Flow: Modularized Agentic Workflow Automation";
    let search = h.tb.call(
        "search_papers",
        args(json!({"query": "modularized agentic workflow"})),
    );
    assert!(ok(&search).contains("2501.07834"));
    let dl = h.tb.call(
        "download_article",
        args(json!({"title_or_id": title, "dest": "papers/"})),
    );
    ok(&dl);
    assert_eq!(dl.produced_uris, vec!["file:papers/2501.07834.txt"]);
    assert!(h.root.join("papers/2501.07834.txt").is_file());
    let unknown = h.tb.call(
        "download_article",
        args(json!({"title_or_id": "Flow: Modular Agents"})),
    );
    assert!(
        unknown.is_error && unknown.content.contains(title),
        "{}",
        unknown.content
    );

    let rag = h.tb.call(
        "document_retriever",
        args(json!({"file_path": "papers/2501.07834.txt", "query": "What are the limitations of the framework?"})),
    );
    assert!(ok(&rag).starts_with("Retrieved "), "{}", rag.content);
    let dummy = h.tb.call(
        "document_retriever",
        args(json!({"file_path": "/path/to/dummy.pdf", "query": "anything"})),
    );
    assert!(dummy.is_error);
    let missing = h.tb.call(
        "document_retriever",
        args(json!({"file_path": "dummy/paper.pdf", "query": "anything"})),
    );
    assert!(missing.is_error && missing.content.starts_with("no file present in that path"));
}

#[test]
fn faas_profile_reads_blobs() {
    let mut h = host(Profile::Faas, "app");
    let dl = h.tb.call(
        "download_article",
        args(json!({"title_or_id": "2411.04468", "dest": "s3://dummy-bucket/agent/"})),
    );
    ok(&dl);
    let uri = "s3://dummy-bucket/agent/2411.04468.txt";
    assert_eq!(dl.produced_uris, vec![uri]);
    assert!(h.cfg.blobs.exists(&uri.parse().unwrap()));
    let rag = h.tb.call(
        "document_retriever",
        args(json!({"s3_uri": uri, "query": "orchestrator ledger of facts and plan"})),
    );
    assert!(ok(&rag).contains("score="));
    let listed = h.tb.call(
        "list_objects",
        args(json!({"prefix": "s3://dummy-bucket/agent/"})),
    );
    assert_eq!(ok(&listed), uri);
    let put = h.tb.call(
        "put_object",
        args(json!({"uri": "s3://dummy-bucket/agent/out.txt", "content": "hi"})),
    );
    ok(&put);
    let got = h.tb.call(
        "get_object",
        args(json!({"uri": "s3://dummy-bucket/agent/out.txt"})),
    );
    assert_eq!(ok(&got), "hi");
}

#[test]
fn stock_history_fixture() {
    let fx = FixtureSet::new(default_fixture_root());
    for t in UNIVERSE {
        let s = fixture_series(&fx, t).unwrap();
        assert_eq!(s.points.len(), 252, "{t}");
        assert!(s.dates_increasing());
        assert_eq!(s.points[0].date, "2024-01-02");
        assert_eq!(s.points[251].date, "2024-12-31");
    }
    let mut h = host(Profile::Local, "app");
    let a = h.tb.call(
        "get_stock_history",
        args(json!({"ticker": "AAPL", "period": "1y"})),
    );
    let b = h.tb.call(
        "get_stock_history",
        args(json!({"ticker": "AAPL", "period": "1y"})),
    );
    assert_eq!(ok(&a).lines().count(), 253);
    assert_eq!(a, b);
    let bad =
        h.tb.call("get_stock_history", args(json!({"ticker": "ZZZZ"})));
    assert!(bad.is_error && bad.content.contains("unknown ticker"));
}

#[test]
fn filesystem_is_confined() {
    let mut h = host(Profile::Local, "app");
    let w = h.tb.call(
        "write_file",
        args(json!({"path": "out/summary.txt", "content": "bytes ü"})),
    );
    assert_eq!(w.produced_uris, vec!["file:out/summary.txt"]);
    let r =
        h.tb.call("read_file", args(json!({"path": "out/summary.txt"})));
    assert_eq!(ok(&r), "bytes ü");
    let l = h.tb.call("list_directory", args(json!({})));
    assert_eq!(ok(&l), "[DIR] out");
    let esc =
        h.tb.call("read_file", args(json!({"path": "../../etc/passwd"})));
    assert!(esc.is_error && esc.content.contains("escapes"));
}

#[test]
fn code_executor_live_writes_into_shared_workspace() {
    if std::process::Command::new("python3")
        .arg("--version")
        .output()
        .is_err()
    {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ToolpackConfig::new(Profile::Local, dir.path().join("blobs"));
    cfg.code.mode = code::CodeMode::Live;
    let mut h = host_with(dir, cfg, "app");
    let r = h.tb.call(
        "execute_code",
        args(
            json!({"code": "open('AppleGoogleMicrosoft.png','wb').write(b'png')\nprint('saved')"}),
        ),
    );
    assert!(ok(&r).contains("saved"));
    assert_eq!(r.produced_uris, vec!["file:AppleGoogleMicrosoft.png"]);
    let listed = h.tb.call("list_directory", args(json!({"path": "."})));
    assert_eq!(ok(&listed), "[FILE] AppleGoogleMicrosoft.png");
    let failed =
        h.tb.call("execute_code", args(json!({"code": "raise SystemExit(3)"})));
    assert!(failed.is_error && failed.content.starts_with("exit_code: 3"));
}

#[test]
fn code_executor_fixture_mode_without_recording() {
    let mut h = host(Profile::Local, "app");
    let r = h.tb.call(
        "execute_code",
        args(json!({"code": "print('never recorded')"})),
    );
    assert!(r.is_error && r.content.contains("no fixture"));
}
