//! Inference and tool-call plumbing shared by the patterns.

use agentx_core::{
    parse_structured_output, FailureReason, Outcome, SchemaViolation, StructuredOutput,
    StructuredSchema, ToolRef,
};
use agentx_llm::{ChatRequest, ChatResponse, Llm, LlmError, Message, ToolCall};
use agentx_mcp::ToolBox;

/// Why a pattern stopped early.
#[derive(Debug)]
pub(crate) enum Halt {
    Llm(LlmError),
    Schema(SchemaViolation),
}

impl Halt {
    /// The outcome for this halt; schema failures get `schema_reason`.
    pub(crate) fn outcome(self, schema_reason: FailureReason, what: &str) -> Outcome {
        match self {
            Halt::Llm(e) => Outcome::failure(FailureReason::Backend, format!("{what}: {e}")),
            Halt::Schema(v) => Outcome::failure(schema_reason, format!("{what}: {v}")),
        }
    }
}

impl From<LlmError> for Halt {
    fn from(e: LlmError) -> Self {
        Halt::Llm(e)
    }
}

pub(crate) fn complete(
    llm: &mut Llm,
    agent: &str,
    label: &str,
    req: ChatRequest,
) -> Result<ChatResponse, LlmError> {
    llm.complete(agent, Some(label), req)
}

/// Asks for a schema-bound reply, re-asking up to `retries` times when the
/// reply does not parse or fails `check`. The transcript is extended with
/// the accepted reply; rejected replies and corrections stay out of it.
pub(crate) fn ask_structured(
    llm: &mut Llm,
    agent: &str,
    label: &str,
    transcript: &mut Vec<Message>,
    schema: &StructuredSchema,
    retries: u32,
    check: impl Fn(&StructuredOutput) -> Result<(), SchemaViolation>,
) -> Result<StructuredOutput, Halt> {
    let mut messages = transcript.clone();
    let mut left = retries;
    loop {
        let req = ChatRequest::new(llm.model_id(), messages.clone()).with_schema(schema.clone());
        let resp = complete(llm, agent, label, req)?;
        let parsed =
            parse_structured_output(schema, &resp.content).and_then(|o| check(&o).map(|()| o));
        match parsed {
            Ok(out) => {
                transcript.push(Message::assistant(out.to_wire(), vec![]));
                return Ok(out);
            }
            Err(v) if left > 0 => {
                left -= 1;
                messages.push(Message::assistant(resp.content, vec![]));
                messages.push(Message::user(format!(
                    "Your reply did not match the required format ({v}). Reply again with a JSON object that follows the schema."
                )));
            }
            Err(v) => return Err(Halt::Schema(v)),
        }
    }
}

pub(crate) fn no_check(_: &StructuredOutput) -> Result<(), SchemaViolation> {
    Ok(())
}

pub(crate) fn violation(field: &str, reason: impl Into<String>) -> SchemaViolation {
    SchemaViolation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Text the model sees for a tool result.
pub(crate) fn tool_message_text(content: &str, is_error: bool) -> String {
    if is_error && !content.starts_with("Error") {
        format!("Error: {content}")
    } else {
        content.to_string()
    }
}

/// Executes `calls` in order and returns one tool message per call plus
/// whether any call failed. Calls outside `allowed` are answered with an
/// error and never reach a server.
pub(crate) fn run_calls(
    tools: &mut ToolBox,
    calls: &[ToolCall],
    allowed: Option<&[ToolRef]>,
) -> (Vec<Message>, bool) {
    let mut out = Vec::with_capacity(calls.len());
    let mut any_error = false;
    for call in calls {
        let permitted = match (allowed, tools.find(&call.name)) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(set), Some(d)) => set.contains(&ToolRef::of(d)),
        };
        let text = if permitted {
            let r = tools.call(&call.name, call.args.clone());
            any_error |= r.is_error;
            tool_message_text(&r.content, r.is_error)
        } else {
            any_error = true;
            format!("Error: tool `{}` is not available here", call.name)
        };
        out.push(Message::tool(&call.id, text));
    }
    (out, any_error)
}
