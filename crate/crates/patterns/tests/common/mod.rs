#![allow(dead_code)]

use std::sync::Arc;

use agentx_core::{
    AppLabel, LogicalClock, Origin, ParamSpec, ParamType, Task, ToolDescriptor, Tracer,
};
use agentx_llm::{Exchange, Llm, PriceTable, Script, ScriptResponse, ScriptedBackend, ToolCall};
use agentx_mcp::{
    Handler, InProcessTransport, LocalSessions, McpServer, Registry, SessionIds, ToolBox,
    ToolResult, Transport,
};
use serde_json::{json, Value};

/// Raw page body returned by the stub `fetch`; long enough to dominate
/// token counts and easy to spot in transcripts.
pub fn page(url: &str) -> String {
    format!("PAGE<{url}> ") + &"lorem ipsum dolor sit amet ".repeat(180)
}

pub const SEARCH_MARKER: &str = "RAW-SEARCH-PAYLOAD";

fn tool(reg: &mut Registry, d: ToolDescriptor, h: Handler, exclusive: bool) {
    reg.register_tool(d, h, exclusive).unwrap();
}

pub fn registry() -> Registry {
    let mut r = Registry::new();
    tool(
        &mut r,
        ToolDescriptor::new(
            "serper",
            "google_search",
            "Search the web.",
            Origin::Community,
        )
        .param(ParamSpec::required("query", ParamType::String, "query")),
        Arc::new(|_, a| {
            let q = a["query"].as_str().unwrap_or_default();
            Ok(ToolResult::ok(format!(
                "{SEARCH_MARKER} for {q}: https://a.example/1 https://b.example/2 https://c.example/3"
            )))
        }),
        false,
    );
    tool(
        &mut r,
        ToolDescriptor::new("fetch", "fetch", "Fetch a URL.", Origin::Official)
            .param(ParamSpec::required("url", ParamType::String, "url"))
            .param(ParamSpec::optional(
                "start_index",
                ParamType::Integer,
                "offset",
            )),
        Arc::new(|_, a| Ok(ToolResult::ok(page(a["url"].as_str().unwrap_or_default())))),
        false,
    );
    tool(
        &mut r,
        ToolDescriptor::new(
            "filesystem",
            "write_file",
            "Write a file.",
            Origin::Official,
        )
        .param(ParamSpec::required("path", ParamType::String, "path"))
        .param(ParamSpec::required("content", ParamType::String, "content")),
        Arc::new(|ctx, a| {
            let rel = a["path"].as_str().unwrap_or_default();
            std::fs::write(
                ctx.workspace.join(rel),
                a["content"].as_str().unwrap_or_default(),
            )
            .map_err(|e| e.to_string())?;
            Ok(ToolResult::ok(format!("wrote {rel}")).with_uris(vec![format!("file:{rel}")]))
        }),
        true,
    );
    tool(
        &mut r,
        ToolDescriptor::new(
            "rag",
            "document_retriever",
            "Query a document.",
            Origin::Custom,
        )
        .param(ParamSpec::required("file_path", ParamType::String, "path"))
        .param(ParamSpec::required("query", ParamType::String, "query")),
        Arc::new(|_, a| {
            let p = a["file_path"].as_str().unwrap_or_default();
            if p.contains("dummy") {
                return Err(format!("no file present in that path: {p}"));
            }
            Ok(ToolResult::ok("RAW-RAG-SNIPPET: the method uses stages."))
        }),
        false,
    );
    tool(
        &mut r,
        ToolDescriptor::new(
            "arxiv",
            "download_article",
            "Download a paper.",
            Origin::Community,
        )
        .param(ParamSpec::required(
            "title_or_id",
            ParamType::String,
            "title",
        )),
        Arc::new(|_, _| Ok(ToolResult::ok("RAW-ARXIV: saved papers/1234.txt"))),
        false,
    );
    tool(
        &mut r,
        ToolDescriptor::new(
            "code_executor",
            "execute_code",
            "Run Python.",
            Origin::Custom,
        )
        .param(ParamSpec::required("code", ParamType::String, "code")),
        Arc::new(|_, a| {
            let code = a["code"].as_str().unwrap_or_default();
            if code.contains("raise") {
                return Ok(ToolResult::error("exit_code: 1\nstderr:\nTraceback"));
            }
            Ok(ToolResult::ok("exit_code: 0\nstdout:\nsaved"))
        }),
        true,
    );
    r
}

pub struct Env {
    pub dir: tempfile::TempDir,
    pub llm: Llm,
    pub tb: ToolBox,
    pub tracer: Tracer,
}

impl Env {
    pub fn new(responses: Vec<ScriptResponse>) -> Env {
        Env::with_servers(
            responses,
            &[
                "serper",
                "fetch",
                "filesystem",
                "rag",
                "arxiv",
                "code_executor",
            ],
        )
    }

    pub fn with_servers(responses: Vec<ScriptResponse>, servers: &[&str]) -> Env {
        let dir = tempfile::tempdir().unwrap();
        let reg = Arc::new(registry());
        let sessions = Arc::new(LocalSessions::new(dir.path(), SessionIds::sequential("s")));
        let transports: Vec<Arc<dyn Transport>> = servers
            .iter()
            .map(|s| {
                Arc::new(InProcessTransport::new(Arc::new(
                    McpServer::single(reg.clone(), s, sessions.clone()).unwrap(),
                ))) as Arc<dyn Transport>
            })
            .collect();
        let tracer = Tracer::new("run", Arc::new(LogicalClock::new(1)));
        let tb = ToolBox::connect(transports, "app", tracer.clone()).unwrap();
        let backend = ScriptedBackend::new(Script::sequential(responses));
        let llm = Llm::new(
            &backend,
            tracer.clone(),
            PriceTable::default(),
            "gpt-4o-mini",
        );
        Env {
            dir,
            llm,
            tb,
            tracer,
        }
    }

    pub fn exchanges(&self) -> &[Exchange] {
        self.llm.exchanges()
    }

    pub fn labelled<'a>(
        &'a self,
        agent: &'a str,
        label: &'a str,
    ) -> impl Iterator<Item = &'a Exchange> + 'a {
        self.exchanges()
            .iter()
            .filter(move |e| e.agent == agent && e.label.as_deref() == Some(label))
    }
}

pub fn task(prompt: &str) -> Task {
    Task::new("t1", prompt, AppLabel::Custom, "0").unwrap()
}

pub fn call(id: &str, name: &str, args: Value) -> ToolCall {
    ToolCall {
        id: id.into(),
        name: name.into(),
        args: args.as_object().cloned().unwrap_or_default(),
    }
}

pub fn calls(list: Vec<ToolCall>) -> ScriptResponse {
    ScriptResponse::calls(list)
}

pub fn structured(v: Value) -> ScriptResponse {
    ScriptResponse::structured(v)
}

pub fn text(s: &str) -> ScriptResponse {
    ScriptResponse::text(s)
}

pub fn stages(list: &[&str]) -> ScriptResponse {
    structured(json!({ "sub_tasks": list }))
}

/// Planner reply from `(description, tool, args)` triples.
pub fn plan(steps: &[(&str, &str, Value)]) -> ScriptResponse {
    structured(json!({
        "step_descriptions": steps.iter().map(|s| s.0).collect::<Vec<_>>(),
        "step_tools": steps.iter().map(|s| s.1).collect::<Vec<_>>(),
        "step_args": steps.iter().map(|s| if s.2.is_null() { String::new() } else { s.2.to_string() }).collect::<Vec<_>>(),
    }))
}

pub fn reflect(success: bool, results: &str) -> ScriptResponse {
    structured(json!({ "success": success, "results": results }))
}

/// The three-stage web-search run: search, fetch three pages, write.
pub fn agentx_web_search_script() -> Vec<ScriptResponse> {
    let urls = [
        "https://a.example/1",
        "https://b.example/2",
        "https://c.example/3",
    ];
    vec![
        stages(&[
            "Search the web",
            "Fetch the top results",
            "Summarize and write the file",
        ]),
        plan(&[("search", "google_search", json!({"query": "edge devices"}))]),
        calls(vec![call(
            "c1",
            "google_search",
            json!({"query": "edge devices"}),
        )]),
        text("Search done."),
        reflect(
            true,
            "Top URLs: https://a.example/1 https://b.example/2 https://c.example/3",
        ),
        plan(&urls.map(|u| ("fetch page", "fetch", json!({"url": u})))),
        calls(
            urls.iter()
                .enumerate()
                .map(|(i, u)| call(&format!("f{i}"), "fetch", json!({"url": u})))
                .collect(),
        ),
        text("Fetched."),
        reflect(
            true,
            "Edge devices run inference locally; used in retail and factories.",
        ),
        plan(&[(
            "write summary",
            "filesystem.write_file",
            json!({"path": "summary.txt"}),
        )]),
        calls(vec![call(
            "w1",
            "write_file",
            json!({"path": "summary.txt", "content": "Edge devices summary"}),
        )]),
        text("Written."),
        reflect(true, "Wrote summary.txt"),
    ]
}

/// The same work as a single ReAct transcript.
pub fn react_web_search_script() -> Vec<ScriptResponse> {
    let urls = [
        "https://a.example/1",
        "https://b.example/2",
        "https://c.example/3",
    ];
    let mut s = vec![calls(vec![call(
        "c1",
        "google_search",
        json!({"query": "edge devices"}),
    )])];
    for (i, u) in urls.iter().enumerate() {
        s.push(calls(vec![call(
            &format!("f{i}"),
            "fetch",
            json!({"url": u}),
        )]));
        s.push(calls(vec![call(
            &format!("g{i}"),
            "fetch",
            json!({"url": u, "start_index": 5000}),
        )]));
    }
    s.push(calls(vec![call(
        "w1",
        "write_file",
        json!({"path": "summary.txt", "content": "Edge devices summary"}),
    )]));
    s.push(text("Saved the summary to summary.txt."));
    s
}
