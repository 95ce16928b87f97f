mod common;

use agentx_core::{FailureReason, ToolRef};
use agentx_patterns::orchestrator::{self, ORCHESTRATOR_AGENT};
use agentx_patterns::react::{self, REACT_AGENT};
use agentx_patterns::{agentx, AgentxConfig, OrchestratorConfig, PatternError, ReactConfig};
use common::*;
use serde_json::json;

#[test]
fn react_web_search_fetches_with_continuations() {
    let mut env = Env::new(react_web_search_script());
    let out = react::run(
        &ReactConfig::default(),
        &task("web search"),
        &mut env.llm,
        &mut env.tb,
    )
    .unwrap();
    assert!(out.outcome.is_success());
    assert_eq!(
        out.final_answer.as_deref(),
        Some("Saved the summary to summary.txt.")
    );
    let fetches = env
        .tb
        .exchanges()
        .iter()
        .filter(|t| t.tool == "fetch")
        .count();
    assert_eq!(fetches, 6);
    let acts: Vec<_> = env.labelled(REACT_AGENT, "act").collect();
    assert_eq!(acts.len(), 9);
    for ex in &acts {
        assert_eq!(ex.request.tools.len(), env.tb.descriptors().len());
    }
    let tin: Vec<u64> = acts.iter().map(|e| e.response.usage.tokens_in).collect();
    assert!(tin.windows(2).all(|w| w[0] <= w[1]), "{tin:?}");
}

#[test]
fn react_stops_at_the_iteration_limit() {
    let script = (0..30)
        .map(|i| {
            calls(vec![call(
                &format!("c{i}"),
                "google_search",
                json!({"query": "q"}),
            )])
        })
        .collect();
    let mut env = Env::new(script);
    let out = react::run(
        &ReactConfig::default(),
        &task("loop"),
        &mut env.llm,
        &mut env.tb,
    )
    .unwrap();
    assert_eq!(out.outcome.reason(), Some(FailureReason::ReactLimit));
    assert_eq!(env.exchanges().len(), 25);
}

#[test]
fn react_trivial_answer_on_first_iteration() {
    let mut env = Env::new(vec![text("4")]);
    let out = react::run(
        &ReactConfig::default(),
        &task("what is 2+2?"),
        &mut env.llm,
        &mut env.tb,
    )
    .unwrap();
    assert!(out.outcome.is_success());
    assert_eq!(env.exchanges().len(), 1);
    assert!(env.tb.exchanges().is_empty());
}

#[test]
fn agentx_uses_fewer_input_tokens_than_react() {
    let mut a = Env::new(agentx_web_search_script());
    agentx::run(
        &AgentxConfig::default(),
        &task("web search"),
        &mut a.llm,
        &mut a.tb,
    )
    .unwrap();
    let mut r = Env::new(react_web_search_script());
    react::run(
        &ReactConfig::default(),
        &task("web search"),
        &mut r.llm,
        &mut r.tb,
    )
    .unwrap();
    let sum = |env: &Env| {
        env.exchanges()
            .iter()
            .map(|e| e.response.usage.tokens_in)
            .sum::<u64>()
    };
    assert!(sum(&a) < sum(&r), "agentx {} vs react {}", sum(&a), sum(&r));
}

fn facts() -> agentx_llm::ScriptResponse {
    structured(
        json!({"given": ["title"], "to_look_up": ["paper"], "to_derive": [], "educated_guesses": []}),
    )
}

fn team_plan() -> agentx_llm::ScriptResponse {
    structured(
        json!({"steps": ["arxiv_agent downloads", "rag_agent queries", "filesystem_agent writes"]}),
    )
}

fn select(agent: &str, instruction: &str) -> agentx_llm::ScriptResponse {
    structured(json!({"is_complete": false, "next_agent": agent, "instruction": instruction}))
}

fn done() -> agentx_llm::ScriptResponse {
    structured(json!({"is_complete": true, "next_agent": "", "instruction": ""}))
}

fn report(success: bool, reflection: &str) -> agentx_llm::ScriptResponse {
    structured(json!({"success": success, "reflection": reflection}))
}

fn research_script(with_failure: bool) -> Vec<agentx_llm::ScriptResponse> {
    let mut s = vec![
        facts(),
        team_plan(),
        select("arxiv_agent", "Download the paper"),
        calls(vec![call(
            "d",
            "download_article",
            json!({"title_or_id": "Flow"}),
        )]),
        text("Downloaded."),
        report(true, "The paper is at papers/1234.txt"),
    ];
    if with_failure {
        s.extend([
            select("rag_agent", "Query the paper"),
            calls(vec![call(
                "r0",
                "document_retriever",
                json!({"file_path": "/path/to/dummy.pdf", "query": "method"}),
            )]),
            text("It failed."),
            report(false, "The document path was wrong."),
            facts(),
            team_plan(),
        ]);
    }
    s.extend([
        select("rag_agent", "Query papers/1234.txt"),
        calls(vec![call(
            "r1",
            "document_retriever",
            json!({"file_path": "papers/1234.txt", "query": "method"}),
        )]),
        text("Queried."),
        report(true, "The method splits work into stages."),
        select("filesystem_agent", "Write the report"),
        calls(vec![call(
            "w",
            "write_file",
            json!({"path": "report.txt", "content": "Report"}),
        )]),
        text("Written."),
        report(true, "Saved report.txt"),
        done(),
        text("The report is saved in report.txt."),
    ]);
    s
}

fn orchestrate(env: &mut Env, cfg: &OrchestratorConfig) -> agentx_patterns::PatternOutput {
    orchestrator::run(cfg, &task("research report"), &mut env.llm, &mut env.tb).unwrap()
}

#[test]
fn orchestrator_routes_through_three_delegates() {
    let mut env = Env::new(research_script(false));
    let out = orchestrate(&mut env, &OrchestratorConfig::default());
    assert!(out.outcome.is_success(), "{:?}", out.outcome);
    assert_eq!(
        out.final_answer.as_deref(),
        Some("The report is saved in report.txt.")
    );
    let order: Vec<&str> = env
        .tb
        .exchanges()
        .iter()
        .map(|t| t.server.as_str())
        .collect();
    assert_eq!(order, ["arxiv", "rag", "filesystem"]);
    assert!(env.dir.path().join("app/report.txt").is_file());
}

#[test]
fn recovery_adds_exactly_two_orchestrator_inferences() {
    let mut clean = Env::new(research_script(false));
    orchestrate(&mut clean, &OrchestratorConfig::default());
    let mut env = Env::new(research_script(true));
    let out = orchestrate(&mut env, &OrchestratorConfig::default());
    assert!(out.outcome.is_success(), "{:?}", out.outcome);
    let lead = |e: &Env| {
        e.exchanges()
            .iter()
            .filter(|x| x.agent == ORCHESTRATOR_AGENT)
            .count()
    };
    assert_eq!(env.labelled(ORCHESTRATOR_AGENT, "facts_update").count(), 1);
    assert_eq!(env.labelled(ORCHESTRATOR_AGENT, "replan").count(), 1);
    assert_eq!(lead(&env), lead(&clean) + 1 + 2);
}

#[test]
fn delegates_see_only_their_own_server() {
    let mut env = Env::new(research_script(true));
    orchestrate(&mut env, &OrchestratorConfig::default());
    for ex in env
        .exchanges()
        .iter()
        .filter(|e| e.agent.ends_with("_agent"))
    {
        let server = ex.agent.trim_end_matches("_agent");
        assert!(!ex.request.tools.is_empty() || ex.label.as_deref() == Some("reflect"));
        assert!(
            ex.request.tools.iter().all(|d| d.server == server),
            "{}",
            ex.agent
        );
    }
}

#[test]
fn orchestrator_never_sees_raw_tool_output() {
    let mut env = Env::new(research_script(true));
    orchestrate(&mut env, &OrchestratorConfig::default());
    let raw: Vec<String> = env
        .tb
        .exchanges()
        .iter()
        .map(|t| t.result.content.clone())
        .collect();
    for ex in env
        .exchanges()
        .iter()
        .filter(|e| e.agent == ORCHESTRATOR_AGENT)
    {
        let text = ex.request.rendered();
        for r in &raw {
            assert!(!text.contains(r.as_str()), "orchestrator saw {r}");
        }
        assert!(!text.contains("RAW-"));
    }
}

#[test]
fn recovery_cap_is_enforced() {
    let mut s = vec![facts(), team_plan()];
    for i in 0..3 {
        s.extend([
            select("rag_agent", "Query"),
            calls(vec![call(
                &format!("r{i}"),
                "document_retriever",
                json!({"file_path": "dummy.pdf", "query": "q"}),
            )]),
            text("fail"),
            report(false, "bad path"),
            facts(),
            team_plan(),
        ]);
    }
    s.extend([
        select("rag_agent", "Query"),
        text("giving up"),
        report(false, "bad path"),
    ]);
    let mut env = Env::new(s);
    let out = orchestrate(&mut env, &OrchestratorConfig::default());
    assert_eq!(out.outcome.reason(), Some(FailureReason::RecoveryLimit));
    assert_eq!(env.labelled(ORCHESTRATOR_AGENT, "facts_update").count(), 3);
}

#[test]
fn delegate_tool_budget_is_capped() {
    let many: Vec<_> = (0..10)
        .map(|i| {
            call(
                &format!("f{i}"),
                "fetch",
                json!({"url": format!("https://x.example/{i}")}),
            )
        })
        .collect();
    let mut env = Env::new(vec![
        facts(),
        team_plan(),
        select("fetch_agent", "Fetch everything"),
        calls(many),
        report(true, "fetched"),
        done(),
        text("ok"),
    ]);
    let out = orchestrate(&mut env, &OrchestratorConfig::default());
    assert!(out.outcome.is_success(), "{:?}", out.outcome);
    assert_eq!(env.tb.exchanges().len(), 8);
    let reflect = env.labelled("fetch_agent", "reflect").next().unwrap();
    assert!(reflect.request.rendered().contains("budget exhausted"));
}

#[test]
fn unknown_agent_counts_as_a_failed_delegation() {
    let mut env = Env::new(vec![
        facts(),
        team_plan(),
        select("web_surfer", "Browse"),
        facts(),
        team_plan(),
        done(),
        text("ok"),
    ]);
    let out = orchestrate(&mut env, &OrchestratorConfig::default());
    assert!(out.outcome.is_success());
    assert_eq!(env.labelled(ORCHESTRATOR_AGENT, "replan").count(), 1);
}

#[test]
fn zero_delegates_is_a_config_error() {
    let mut env = Env::with_servers(vec![], &[]);
    let err = orchestrator::run(
        &OrchestratorConfig::default(),
        &task("x"),
        &mut env.llm,
        &mut env.tb,
    )
    .unwrap_err();
    assert!(matches!(err, PatternError::NoDelegates));
}

#[test]
fn plan_prompt_lists_the_team() {
    let mut env = Env::new(research_script(false));
    orchestrate(&mut env, &OrchestratorConfig::default());
    let plan = env.labelled(ORCHESTRATOR_AGENT, "plan").next().unwrap();
    let text = plan.request.latest();
    assert!(text.contains("- arxiv_agent: Agent for interacting with the arXiv API"));
    assert!(text.contains("- rag_agent:"));
    let refs: Vec<ToolRef> = env.tb.descriptors().iter().map(ToolRef::of).collect();
    assert_eq!(refs.len(), 6);
}
