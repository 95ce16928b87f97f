//! OpenAI-compatible chat-completions backend.

use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::backend::{ChatBackend, ChatSession};
use crate::message::{ChatRequest, ChatResponse, Message, Role, ToolCall, Usage};
use crate::LlmError;

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    /// Base URL (`https://host/v1`) or the full `/chat/completions` endpoint.
    pub url: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub timeout: Duration,
}

impl HttpBackendConfig {
    /// Reads `AGENTX_LLM_URL`, `AGENTX_LLM_KEY` and `AGENTX_LLM_MODEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        let url = std::env::var("AGENTX_LLM_URL")
            .map_err(|_| LlmError::BackendUnavailable("AGENTX_LLM_URL is not set".into()))?;
        Ok(HttpBackendConfig {
            url,
            api_key: std::env::var("AGENTX_LLM_KEY").ok(),
            model: std::env::var("AGENTX_LLM_MODEL").ok(),
            timeout: Duration::from_secs(120),
        })
    }

    fn endpoint(&self) -> String {
        let base = self.url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpBackend {
    cfg: HttpBackendConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: HttpBackendConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .build()
            .into();
        HttpBackend { cfg, agent }
    }
}

impl ChatBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn open(&self) -> Box<dyn ChatSession> {
        Box::new(self.clone())
    }
}

impl ChatSession for HttpBackend {
    fn complete(&mut self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let endpoint = self.cfg.endpoint();
        agentx_core::net::guard(&endpoint)
            .map_err(|e| LlmError::BackendUnavailable(e.to_string()))?;
        let body = request_body(req, self.cfg.model.as_deref());
        let mut call = self.agent.post(&endpoint);
        if let Some(key) = &self.cfg.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call
            .send_json(&body)
            .map_err(|e| LlmError::BackendUnavailable(e.to_string()))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| LlmError::BackendUnavailable(format!("bad response body: {e}")))?;
        parse_response(&v)
    }
}

fn wire_message(m: &Message) -> Value {
    let role = match m.role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        Role::Tool => "tool",
    };
    let mut out = json!({"role": role, "content": m.content});
    if !m.tool_calls.is_empty() {
        out["tool_calls"] = m
            .tool_calls
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "type": "function",
                    "function": {"name": c.name, "arguments": Value::Object(c.args.clone()).to_string()},
                })
            })
            .collect();
    }
    if let Some(id) = &m.tool_call_id {
        out["tool_call_id"] = Value::String(id.clone());
    }
    out
}

/// Request body in the chat-completions wire format.
pub fn request_body(req: &ChatRequest, model_override: Option<&str>) -> Value {
    let mut body = json!({
        "model": model_override.unwrap_or(&req.model_id),
        "messages": req.messages.iter().map(wire_message).collect::<Vec<_>>(),
        "temperature": req.temperature,
        "top_p": req.top_p,
    });
    if !req.tools.is_empty() {
        body["tools"] = req
            .tools
            .iter()
            .map(|t| {
                json!({
                    "type": "function",
                    "function": {"name": t.name, "description": t.description, "parameters": t.input_schema()},
                })
            })
            .collect();
    }
    if let Some(schema) = &req.schema {
        body["response_format"] = json!({
            "type": "json_schema",
            "json_schema": {"name": schema.name, "schema": schema.to_json_schema(), "strict": true},
        });
    }
    body
}

pub fn parse_response(v: &Value) -> Result<ChatResponse, LlmError> {
    let bad = |what: &str| LlmError::BackendUnavailable(format!("malformed completion: {what}"));
    let msg = v
        .pointer("/choices/0/message")
        .ok_or_else(|| bad("no choices"))?;
    let content = msg
        .get("content")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let mut tool_calls = Vec::new();
    for c in msg
        .get("tool_calls")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
    {
        let name = c
            .pointer("/function/name")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("tool call without name"))?;
        let raw_args = c
            .pointer("/function/arguments")
            .and_then(Value::as_str)
            .unwrap_or("{}");
        let args: Map<String, Value> = serde_json::from_str(raw_args).unwrap_or_default();
        tool_calls.push(ToolCall {
            id: c
                .get("id")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
            name: name.to_string(),
            args,
        });
    }
    let usage = Usage {
        tokens_in: v
            .pointer("/usage/prompt_tokens")
            .and_then(Value::as_u64)
            .unwrap_or(0),
        tokens_out: v
            .pointer("/usage/completion_tokens")
            .and_then(Value::as_u64)
            .unwrap_or(0),
    };
    Ok(ChatResponse {
        content,
        tool_calls,
        usage,
    })
}
