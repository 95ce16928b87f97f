use agentx_core::{digest_json, Actor, Tracer};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backend::{ChatBackend, ChatSession};
use crate::cost::{estimate_tokens, PriceTable};
use crate::message::{ChatRequest, ChatResponse, Role, Usage};
use crate::LlmError;

/// One recorded inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub seq: u64,
    pub agent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    pub request: ChatRequest,
    pub response: ChatResponse,
}

/// Per-run handle on a backend: enforces request rules, fills in missing
/// usage, and traces every completion.
pub struct Llm {
    session: Box<dyn ChatSession>,
    tracer: Tracer,
    prices: PriceTable,
    model_id: String,
    exchanges: Vec<Exchange>,
}

impl std::fmt::Debug for Llm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Llm")
            .field("model_id", &self.model_id)
            .field("exchanges", &self.exchanges.len())
            .finish()
    }
}

impl Llm {
    pub fn new(
        backend: &dyn ChatBackend,
        tracer: Tracer,
        prices: PriceTable,
        model_id: &str,
    ) -> Self {
        Llm {
            session: backend.open(),
            tracer,
            prices,
            model_id: model_id.to_string(),
            exchanges: Vec::new(),
        }
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn prices(&self) -> &PriceTable {
        &self.prices
    }

    pub fn tracer(&self) -> &Tracer {
        &self.tracer
    }

    pub fn exchanges(&self) -> &[Exchange] {
        &self.exchanges
    }

    pub fn into_exchanges(self) -> Vec<Exchange> {
        self.exchanges
    }

    pub fn complete(
        &mut self,
        agent: &str,
        label: Option<&str>,
        req: ChatRequest,
    ) -> Result<ChatResponse, LlmError> {
        match req.messages.first().map(|m| m.role) {
            None => return Err(LlmError::InvalidRequest("no messages".into())),
            Some(Role::System | Role::User) => {}
            Some(r) => {
                return Err(LlmError::InvalidRequest(format!(
                    "first message has role {r:?}"
                )))
            }
        }
        if req.schema.is_some() && !req.tools.is_empty() {
            return Err(LlmError::InvalidRequest(
                "a request may carry tools or an output schema, not both".into(),
            ));
        }
        let estimated = estimate_tokens(&req.rendered());
        if estimated > self.prices.context_window {
            return Err(LlmError::ContextOverflow {
                estimated,
                window: self.prices.context_window,
            });
        }

        let span = self.tracer.begin();
        let mut resp = self.session.complete(&req)?;
        if req.schema.is_some() && !resp.tool_calls.is_empty() {
            return Err(LlmError::MixedResponse);
        }
        if resp.usage == Usage::default() {
            resp.usage = Usage {
                tokens_in: estimated.max(1),
                tokens_out: estimate_tokens(&resp.rendered()),
            };
        }
        let digest = digest_json(&json!({"request": req, "response": resp}));
        let seq = self.tracer.finish(
            span,
            Actor::agent(agent),
            label,
            (resp.usage.tokens_in, resp.usage.tokens_out),
            digest,
        );
        self.exchanges.push(Exchange {
            seq,
            agent: agent.to_string(),
            label: label.map(str::to_string),
            stage: self.tracer.stage(),
            request: req,
            response: resp.clone(),
        });
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::Message;
    use crate::scripted::{Script, ScriptResponse, ScriptedBackend};
    use agentx_core::{FieldType, LogicalClock, Origin, StructuredSchema, ToolDescriptor};
    use std::sync::Arc;

    fn llm(script: Script, window: u64) -> Llm {
        let prices = PriceTable {
            context_window: window,
            ..PriceTable::default()
        };
        let tracer = Tracer::new("r", Arc::new(LogicalClock::new(1)));
        Llm::new(&ScriptedBackend::new(script), tracer, prices, "m")
    }

    #[test]
    fn context_overflow() {
        let mut l = llm(Script::sequential([ScriptResponse::text("x")]), 128_000);
        let big = "a".repeat(130_000 * 4);
        let err = l
            .complete("a", None, ChatRequest::new("m", vec![Message::user(big)]))
            .unwrap_err();
        assert!(matches!(
            err,
            LlmError::ContextOverflow {
                estimated: 130_000,
                window: 128_000
            }
        ));
    }

    #[test]
    fn one_event_per_completion_with_matching_usage() {
        let mut l = llm(
            Script::sequential([ScriptResponse::text("a"), ScriptResponse::text("bb")]),
            1000,
        );
        for _ in 0..2 {
            l.complete(
                "agent",
                None,
                ChatRequest::new("m", vec![Message::user("q")]),
            )
            .unwrap();
        }
        let ev = l.tracer().events();
        assert_eq!(ev.len(), 2);
        for (e, x) in ev.iter().zip(l.exchanges()) {
            assert_eq!(e.tokens_in, x.response.usage.tokens_in);
            assert_eq!(e.tokens_out, x.response.usage.tokens_out);
            assert!(e.tokens_in >= 1);
        }
    }

    #[test]
    fn schema_and_tools_are_exclusive() {
        let mut l = llm(Script::sequential([ScriptResponse::text("x")]), 1000);
        let req = ChatRequest::new("m", vec![Message::user("q")])
            .with_tools(vec![ToolDescriptor::new("s", "t", "d", Origin::Custom)])
            .with_schema(StructuredSchema::new("x").field("a", FieldType::String, "d"));
        assert!(matches!(
            l.complete("a", None, req),
            Err(LlmError::InvalidRequest(_))
        ));
    }

    #[test]
    fn first_message_role_checked() {
        let mut l = llm(Script::sequential([ScriptResponse::text("x")]), 1000);
        let req = ChatRequest::new("m", vec![Message::assistant("q", vec![])]);
        assert!(l.complete("a", None, req).is_err());
    }
}
