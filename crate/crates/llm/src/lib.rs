//! Chat-completion gateway.
//!
//! [`Llm`] wraps a [`ChatBackend`] for a single run. Two backends ship: a
//! deterministic [`ScriptedBackend`] replaying `script.v1` files and an
//! [`HttpBackend`] for OpenAI-compatible endpoints.

mod backend;
mod cost;
mod gateway;
pub mod http;
mod message;
pub mod scripted;

pub use backend::{ChatBackend, ChatSession};
pub use cost::{estimate_tokens, llm_cost, PriceTable};
pub use gateway::{Exchange, Llm};
pub use http::{HttpBackend, HttpBackendConfig};
pub use message::{ChatRequest, ChatResponse, Message, Role, ToolCall, Usage};
pub use scripted::{Match, Script, ScriptEntry, ScriptResponse, ScriptedBackend};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("request needs ~{estimated} tokens, context window is {window}")]
    ContextOverflow { estimated: u64, window: u64 },
    #[error("script exhausted at request {position}")]
    ScriptExhausted { position: usize },
    #[error("response carries tool calls for a schema-bound request")]
    MixedResponse,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid script: {0}")]
    InvalidScript(String),
}
