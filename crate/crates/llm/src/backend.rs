use crate::message::{ChatRequest, ChatResponse};
use crate::LlmError;

/// A chat-completion provider. Backends are shared across runs; each run
/// opens its own session.
pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &str;
    fn open(&self) -> Box<dyn ChatSession>;
}

pub trait ChatSession: Send {
    fn complete(&mut self, req: &ChatRequest) -> Result<ChatResponse, LlmError>;
}
