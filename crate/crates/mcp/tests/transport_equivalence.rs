mod common;

use std::sync::Arc;

use agentx_mcp::rpc::{self, RpcRequest};
use agentx_mcp::{SessionIds, Transport};
use proptest::prelude::*;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
enum Step {
    List,
    Echo(String, Option<i64>),
    Missing,
    Fail,
    Unknown(String),
    BadMethod,
}

fn arb_step() -> impl Strategy<Value = Step> {
    prop_oneof![
        Just(Step::List),
        ("[a-z ]{0,12}", proptest::option::of(0i64..4)).prop_map(|(t, n)| Step::Echo(t, n)),
        Just(Step::Missing),
        Just(Step::Fail),
        "[a-z]{1,6}".prop_map(|s| Step::Unknown(format!("x_{s}"))),
        Just(Step::BadMethod),
    ]
}

fn request(i: i64, step: &Step) -> RpcRequest {
    match step {
        Step::List => RpcRequest::new(i, rpc::TOOLS_LIST, json!({})),
        Step::Echo(t, n) => {
            let mut a = json!({"text": t});
            if let Some(n) = n {
                a["times"] = json!(n);
            }
            RpcRequest::new(i, rpc::TOOLS_CALL, json!({"name": "echo", "arguments": a}))
        }
        Step::Missing => {
            RpcRequest::new(i, rpc::TOOLS_CALL, json!({"name": "echo", "arguments": {}}))
        }
        Step::Fail => RpcRequest::new(i, rpc::TOOLS_CALL, json!({"name": "fail"})),
        Step::Unknown(n) => RpcRequest::new(i, rpc::TOOLS_CALL, json!({"name": n})),
        Step::BadMethod => RpcRequest::new(i, "prompts/list", json!({})),
    }
}

/// Replays a sequence in a fresh session; returns the response bodies with
/// the session-specific id removed.
fn replay(t: &Arc<dyn Transport>, steps: &[Step]) -> Vec<Value> {
    let init = t
        .roundtrip(
            &RpcRequest::new(0, rpc::INITIALIZE, json!({"app_instance": "eq"})),
            None,
        )
        .unwrap();
    let sid = init.session_id.unwrap();
    let mut out = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        let env = t.roundtrip(&request(i as i64 + 1, s), Some(&sid)).unwrap();
        out.push(serde_json::to_value(&env.response).unwrap());
    }
    let del = t
        .roundtrip(
            &RpcRequest::new(999, rpc::SESSION_DELETE, json!({})),
            Some(&sid),
        )
        .unwrap();
    out.push(serde_json::to_value(&del.response).unwrap());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn in_process_and_http_agree(steps in proptest::collection::vec(arb_step(), 1..12)) {
        let dir = tempfile::tempdir().unwrap();
        let local = common::in_process(common::server(dir.path(), "echo", SessionIds::Random));
        let (_h, remote) = common::over_http(common::server(dir.path(), "echo", SessionIds::Random));
        prop_assert_eq!(replay(&local, &steps), replay(&remote, &steps));
    }
}
