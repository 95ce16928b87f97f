//! Deterministic backend replaying a `script.v1` document.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::backend::{ChatBackend, ChatSession};
use crate::cost::estimate_tokens;
use crate::message::{ChatRequest, ChatResponse, ToolCall, Usage};
use crate::LlmError;

pub const SCRIPT_SCHEMA: &str = "script.v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Match {
    /// Substring of the request's latest message.
    Contains(String),
    /// Zero-based index of the request within the session.
    Position(usize),
}

impl Match {
    fn matches(&self, req: &ChatRequest, position: usize) -> bool {
        match self {
            Match::Contains(needle) => req.latest().contains(needle.as_str()),
            Match::Position(p) => *p == position,
        }
    }
}

/// Scripted reply. `structured` is a convenience: when present it is
/// serialized into `content`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptResponse {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

impl ScriptResponse {
    pub fn text(content: impl Into<String>) -> Self {
        ScriptResponse {
            content: content.into(),
            ..Default::default()
        }
    }

    pub fn structured(value: Value) -> Self {
        ScriptResponse {
            structured: value.as_object().cloned(),
            ..Default::default()
        }
    }

    pub fn calls(calls: Vec<ToolCall>) -> Self {
        ScriptResponse {
            tool_calls: calls,
            ..Default::default()
        }
    }

    fn content(&self) -> String {
        match &self.structured {
            Some(obj) => Value::Object(obj.clone()).to_string(),
            None => self.content.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default, rename = "match", skip_serializing_if = "Option::is_none")]
    pub matcher: Option<Match>,
    pub response: ScriptResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub schema: String,
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        Script {
            schema: SCRIPT_SCHEMA.to_string(),
            entries,
        }
    }

    /// Positional script: one reply per request, in order.
    pub fn sequential(responses: impl IntoIterator<Item = ScriptResponse>) -> Self {
        Script::new(
            responses
                .into_iter()
                .map(|response| ScriptEntry {
                    matcher: None,
                    response,
                })
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let s: Script =
            serde_json::from_str(text).map_err(|e| LlmError::InvalidScript(e.to_string()))?;
        if s.schema != SCRIPT_SCHEMA {
            return Err(LlmError::InvalidScript(format!(
                "expected schema {SCRIPT_SCHEMA}, found {}",
                s.schema
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::InvalidScript(format!("{}: {e}", path.display())))?;
        Script::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }
}

/// Shareable scripted backend; each [`ChatBackend::open`] starts a fresh
/// cursor so concurrent runs replay independently.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    script: Arc<Script>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        ScriptedBackend {
            script: Arc::new(script),
        }
    }

    pub fn script(&self) -> &Script {
        &self.script
    }
}

impl ChatBackend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn open(&self) -> Box<dyn ChatSession> {
        Box::new(ScriptedSession {
            script: self.script.clone(),
            consumed: vec![false; self.script.entries.len()],
            position: 0,
        })
    }
}

struct ScriptedSession {
    script: Arc<Script>,
    consumed: Vec<bool>,
    position: usize,
}

impl ScriptedSession {
    fn select(&self, req: &ChatRequest) -> Option<usize> {
        let entries = &self.script.entries;
        let open = |i: &usize| !self.consumed[*i];
        (0..entries.len())
            .filter(open)
            .find(|&i| {
                entries[i]
                    .matcher
                    .as_ref()
                    .is_some_and(|m| m.matches(req, self.position))
            })
            .or_else(|| {
                (0..entries.len())
                    .filter(open)
                    .find(|&i| entries[i].matcher.is_none())
            })
    }
}

impl ChatSession for ScriptedSession {
    fn complete(&mut self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let idx = self.select(req).ok_or(LlmError::ScriptExhausted {
            position: self.position,
        })?;
        self.consumed[idx] = true;
        self.position += 1;
        let entry = &self.script.entries[idx].response;
        let mut resp = ChatResponse {
            content: entry.content(),
            tool_calls: entry.tool_calls.clone(),
            usage: Usage::default(),
        };
        resp.usage = entry.usage.unwrap_or(Usage {
            tokens_in: estimate_tokens(&req.rendered()).max(1),
            tokens_out: estimate_tokens(&resp.rendered()),
        });
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::Message;
    use serde_json::json;

    fn req(text: &str) -> ChatRequest {
        ChatRequest::new("m", vec![Message::user(text)])
    }

    #[test]
    fn single_entry_script() {
        let b = ScriptedBackend::new(Script::sequential([ScriptResponse::text("hello")]));
        let mut s = b.open();
        assert_eq!(s.complete(&req("hi")).unwrap().content, "hello");
        assert!(matches!(
            s.complete(&req("again")),
            Err(LlmError::ScriptExhausted { position: 1 })
        ));
    }

    #[test]
    fn predicate_beats_position() {
        let script = Script::new(vec![
            ScriptEntry {
                matcher: None,
                response: ScriptResponse::text("positional"),
            },
            ScriptEntry {
                matcher: Some(Match::Contains("judge".into())),
                response: ScriptResponse::text("matched"),
            },
        ]);
        let b = ScriptedBackend::new(script);
        let mut s = b.open();
        assert_eq!(s.complete(&req("please judge")).unwrap().content, "matched");
        assert_eq!(
            s.complete(&req("please judge")).unwrap().content,
            "positional"
        );
    }

    #[test]
    fn position_predicate() {
        let script = Script::new(vec![
            ScriptEntry {
                matcher: Some(Match::Position(1)),
                response: ScriptResponse::text("second"),
            },
            ScriptEntry {
                matcher: None,
                response: ScriptResponse::text("first"),
            },
        ]);
        let mut s = ScriptedBackend::new(script).open();
        assert_eq!(s.complete(&req("a")).unwrap().content, "first");
        assert_eq!(s.complete(&req("b")).unwrap().content, "second");
    }

    #[test]
    fn sessions_have_independent_cursors() {
        let b = ScriptedBackend::new(Script::sequential([
            ScriptResponse::text("1"),
            ScriptResponse::text("2"),
        ]));
        let mut a = b.open();
        let mut c = b.open();
        assert_eq!(a.complete(&req("x")).unwrap().content, "1");
        assert_eq!(c.complete(&req("x")).unwrap().content, "1");
    }

    #[test]
    fn structured_becomes_content_and_usage_is_estimated() {
        let b = ScriptedBackend::new(Script::sequential([ScriptResponse::structured(
            json!({"sub_tasks": ["a"]}),
        )]));
        let r = b.open().complete(&req("12345678")).unwrap();
        assert_eq!(r.content, r#"{"sub_tasks":["a"]}"#);
        assert_eq!(r.usage.tokens_in, 2);
        assert_eq!(r.usage.tokens_out, estimate_tokens(&r.content));
    }

    #[test]
    fn json_round_trip_and_schema_tag() {
        let s = Script::sequential([ScriptResponse::text("x")]);
        assert_eq!(Script::from_json(&s.to_json_pretty()).unwrap(), s);
        assert!(Script::from_json(r#"{"schema":"script.v0","entries":[]}"#).is_err());
    }
}
