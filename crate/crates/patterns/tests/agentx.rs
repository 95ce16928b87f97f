mod common;

use agentx_core::{FailureReason, StageStatus, ToolRef};
use agentx_patterns::agentx::{self, EXECUTOR_AGENT, PLANNER_AGENT, STAGE_AGENT};
use agentx_patterns::AgentxConfig;
use common::*;
use serde_json::json;

fn run(env: &mut Env, cfg: &AgentxConfig, prompt: &str) -> agentx_patterns::PatternOutput {
    agentx::run(cfg, &task(prompt), &mut env.llm, &mut env.tb).unwrap()
}

#[test]
fn web_search_runs_three_stages() {
    let mut env = Env::new(agentx_web_search_script());
    let out = run(
        &mut env,
        &AgentxConfig::default(),
        "Search for edge devices and summarize the results in a text file",
    );
    assert!(out.outcome.is_success(), "{:?}", out.outcome);
    assert_eq!(out.stages.len(), 3);
    assert!(out
        .stages
        .iter()
        .all(|s| s.status == StageStatus::Done && s.attempts == 1));
    assert_eq!(out.final_answer.as_deref(), Some("Wrote summary.txt"));
    assert_eq!(
        std::fs::read_to_string(env.dir.path().join("app/summary.txt")).unwrap(),
        "Edge devices summary"
    );
    assert_eq!(env.labelled(STAGE_AGENT, "stages").count(), 1);
    assert_eq!(env.tb.exchanges().len(), 5);
}

#[test]
fn executor_requests_carry_only_planned_tools() {
    let mut env = Env::new(agentx_web_search_script());
    run(&mut env, &AgentxConfig::default(), "web search");
    let expected = [
        vec![ToolRef::new("serper", "google_search")],
        vec![ToolRef::new("fetch", "fetch")],
        vec![ToolRef::new("filesystem", "write_file")],
    ];
    let acts: Vec<_> = env.labelled(EXECUTOR_AGENT, "act").collect();
    assert_eq!(acts.len(), 6);
    for ex in acts {
        let k = ex.stage.unwrap();
        let sent: Vec<ToolRef> = ex.request.tools.iter().map(ToolRef::of).collect();
        assert_eq!(sent, expected[k], "stage {k}");
    }
}

#[test]
fn later_stages_see_summaries_not_raw_outputs() {
    let mut env = Env::new(agentx_web_search_script());
    run(&mut env, &AgentxConfig::default(), "web search");
    for k in 1..3 {
        let first = env
            .exchanges()
            .iter()
            .find(|e| e.agent == EXECUTOR_AGENT && e.stage == Some(k))
            .unwrap();
        let text = first.request.rendered();
        assert!(
            !text.contains(SEARCH_MARKER),
            "stage {k} saw raw search output"
        );
        assert!(!text.contains("PAGE<"), "stage {k} saw raw page output");
        assert!(text.contains("Top URLs: https://a.example/1"));
        for tool_ex in env.tb.exchanges().iter().filter(|t| t.stage < Some(k)) {
            assert!(!text.contains(&tool_ex.result.content));
        }
    }
}

#[test]
fn planner_prompts_partition_the_stages() {
    let mut env = Env::new(agentx_web_search_script());
    run(&mut env, &AgentxConfig::default(), "web search");
    let names = [
        "Search the web",
        "Fetch the top results",
        "Summarize and write the file",
    ];
    for ex in env.labelled(PLANNER_AGENT, "plan") {
        let k = ex.stage.unwrap();
        let system = &ex.request.messages[0].content;
        let completed = &system
            [system.find("Completed stages").unwrap()..system.find("Current stage:").unwrap()];
        let current =
            &system[system.find("Current stage:").unwrap()..system.find("Future stages").unwrap()];
        let future =
            &system[system.find("Future stages").unwrap()..system.find("Available tools").unwrap()];
        for (i, n) in names.iter().enumerate() {
            let section = match i.cmp(&k) {
                std::cmp::Ordering::Less => completed,
                std::cmp::Ordering::Equal => current,
                std::cmp::Ordering::Greater => future,
            };
            assert!(section.contains(n), "stage {k}: {n} not in its section");
            for other in [completed, current, future]
                .iter()
                .filter(|s| !std::ptr::eq(**s, section))
            {
                assert!(!other.contains(n));
            }
        }
    }
}

#[test]
fn trace_is_sequential_by_stage() {
    let mut env = Env::new(agentx_web_search_script());
    run(&mut env, &AgentxConfig::default(), "web search");
    let events = env.tracer.events();
    assert_eq!(events[0].stage, None);
    let stages: Vec<usize> = events.iter().filter_map(|e| e.stage).collect();
    assert!(stages.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(stages.last(), Some(&2));
    assert!(events.windows(2).all(|w| w[0].end_ms <= w[1].start_ms));
}

#[test]
fn failed_code_is_retried_on_a_second_attempt() {
    let mut env = Env::new(vec![
        stages(&["Plot the prices"]),
        plan(&[("plot", "execute_code", json!({}))]),
        calls(vec![call(
            "c1",
            "execute_code",
            json!({"code": "raise ValueError"}),
        )]),
        text("The code failed."),
        reflect(false, "plot failed"),
        calls(vec![call("c2", "execute_code", json!({"code": "plot()"}))]),
        text("Saved."),
        reflect(true, "saved plot.png"),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "plot");
    assert!(out.outcome.is_success());
    assert_eq!(out.stages[0].attempts, 2);
    assert_eq!(env.labelled(EXECUTOR_AGENT, "reflect").count(), 2);
    assert_eq!(env.tb.exchanges().len(), 2);
    assert!(env.tb.exchanges()[0].result.is_error);
}

#[test]
fn always_failing_tool_stops_after_max_attempts() {
    let mut script = vec![
        stages(&["Plot the prices"]),
        plan(&[("plot", "execute_code", json!({}))]),
    ];
    for i in 0..5 {
        script.push(calls(vec![call(
            &format!("c{i}"),
            "execute_code",
            json!({"code": "raise"}),
        )]));
        script.push(text("Failed again."));
        script.push(reflect(false, "error"));
    }
    let mut env = Env::new(script);
    let out = run(&mut env, &AgentxConfig::default(), "plot");
    assert_eq!(out.outcome.reason(), Some(FailureReason::ToolErrorLoop));
    assert_eq!(out.stages[0].status, StageStatus::Failed);
    assert_eq!(out.stages[0].attempts, 5);
    assert_eq!(env.labelled(EXECUTOR_AGENT, "reflect").count(), 5);
    assert_eq!(env.tb.exchanges().len(), 5);
}

#[test]
fn tool_free_plan_goes_straight_to_reflection() {
    let mut env = Env::new(vec![
        stages(&["Summarize what is known"]),
        plan(&[("summarize", "", serde_json::Value::Null)]),
        reflect(true, "summary"),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "summarize");
    assert!(out.outcome.is_success());
    let exec: Vec<_> = env
        .exchanges()
        .iter()
        .filter(|e| e.agent == EXECUTOR_AGENT)
        .collect();
    assert_eq!(exec.len(), 1);
    assert!(exec[0].request.tools.is_empty());
}

#[test]
fn single_stage_write() {
    let mut env = Env::new(vec![
        stages(&["Write hi to a file"]),
        plan(&[(
            "write",
            "write_file",
            json!({"path": "hi.txt", "content": "hi"}),
        )]),
        calls(vec![call(
            "w",
            "write_file",
            json!({"path": "hi.txt", "content": "hi"}),
        )]),
        text("done"),
        reflect(true, "wrote hi.txt"),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "write 'hi' to a file");
    assert!(out.outcome.is_success());
    assert_eq!(out.stages.len(), 1);
    assert_eq!(
        std::fs::read_to_string(env.dir.path().join("app/hi.txt")).unwrap(),
        "hi"
    );
}

#[test]
fn unknown_tool_triggers_one_replan() {
    let mut env = Env::new(vec![
        stages(&["Search"]),
        plan(&[("browse", "web_browser", json!({"url": "x"}))]),
        plan(&[("search", "google_search", json!({"query": "q"}))]),
        calls(vec![call("c", "google_search", json!({"query": "q"}))]),
        text("ok"),
        reflect(true, "found"),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "search");
    assert!(out.outcome.is_success());
    let plans: Vec<_> = env.labelled(PLANNER_AGENT, "plan").collect();
    assert_eq!(plans.len(), 2);
    assert!(plans[1]
        .request
        .latest()
        .contains("unknown tool `web_browser`"));
}

#[test]
fn second_bad_plan_fails_the_stage() {
    let mut env = Env::new(vec![
        stages(&["Search", "Write"]),
        plan(&[]),
        plan(&[("browse", "web_browser", json!({}))]),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "search");
    assert_eq!(out.outcome.reason(), Some(FailureReason::PlanRejected));
    assert_eq!(out.stages.len(), 2);
    assert_eq!(out.stages[0].status, StageStatus::Failed);
    assert_eq!(out.stages[1].status, StageStatus::Pending);
    assert!(env.tb.exchanges().is_empty());
}

#[test]
fn calls_outside_the_plan_are_refused() {
    let mut env = Env::new(vec![
        stages(&["Search"]),
        plan(&[("search", "google_search", json!({"query": "q"}))]),
        calls(vec![call(
            "x",
            "write_file",
            json!({"path": "a.txt", "content": "a"}),
        )]),
        text("ok"),
        reflect(true, "done"),
    ]);
    run(&mut env, &AgentxConfig::default(), "search");
    assert!(env.tb.exchanges().is_empty());
    assert!(!env.dir.path().join("app/a.txt").exists());
    let reflect_req = &env
        .labelled(EXECUTOR_AGENT, "reflect")
        .next()
        .unwrap()
        .request;
    assert!(reflect_req.rendered().contains("not available here"));
}

#[test]
fn stage_schema_violations_exhaust_retries() {
    let mut env = Env::new(vec![
        text("first search"),
        stages(&[]),
        structured(json!({"stages": ["a"]})),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "search");
    assert_eq!(out.outcome.reason(), Some(FailureReason::StageGeneration));
    assert_eq!(env.labelled(STAGE_AGENT, "stages").count(), 3);
    assert!(out.stages.is_empty());
}

#[test]
fn schema_retry_recovers() {
    let mut env = Env::new(vec![
        text("not json"),
        stages(&["Summarize"]),
        plan(&[("think", "none", serde_json::Value::Null)]),
        reflect(true, "ok"),
    ]);
    let out = run(&mut env, &AgentxConfig::default(), "x");
    assert!(out.outcome.is_success());
}

#[test]
fn exhausted_script_is_a_backend_failure() {
    let mut env = Env::new(vec![stages(&["Search"])]);
    let out = run(&mut env, &AgentxConfig::default(), "x");
    assert_eq!(out.outcome.reason(), Some(FailureReason::Backend));
}

#[test]
fn prompts_embed_required_fragments() {
    let p = agentx_patterns::AgentxPrompts::builtin();
    assert!(p.stage.contains("least number of sub-tasks"));
    assert!(p.stage.contains("combine them into a single sub-task"));
    assert!(p.executor.contains("Execute the following plan:"));
    assert!(p
        .reflection
        .contains("summarize only the relevant information"));
}

#[test]
fn prompt_dir_overrides_individual_templates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("retry.txt"), "Try again.").unwrap();
    let p = agentx_patterns::AgentxPrompts::load(Some(dir.path())).unwrap();
    assert_eq!(p.retry, "Try again.");
    assert_eq!(p.stage, agentx_patterns::AgentxPrompts::builtin().stage);
}
