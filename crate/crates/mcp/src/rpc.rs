//! JSON-RPC 2.0 envelopes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const INITIALIZE: &str = "initialize";
pub const TOOLS_LIST: &str = "tools/list";
pub const TOOLS_CALL: &str = "tools/call";
pub const SESSION_DELETE: &str = "session/delete";

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const HANDLER_FAILURE: i64 = -32000;
pub const SESSION_UNKNOWN: i64 = -32001;

pub const PROTOCOL_VERSION: &str = "2025-03-26";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RpcId {
    Num(i64),
    Str(String),
}

impl From<i64> for RpcId {
    fn from(n: i64) -> Self {
        RpcId::Num(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcRequest {
    pub jsonrpc: String,
    pub id: RpcId,
    pub method: String,
    #[serde(default)]
    pub params: Value,
}

impl RpcRequest {
    pub fn new(id: impl Into<RpcId>, method: &str, params: Value) -> Self {
        RpcRequest {
            jsonrpc: "2.0".into(),
            id: id.into(),
            method: method.to_string(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl RpcError {
    pub fn new(code: i64, message: impl Into<String>) -> Self {
        RpcError {
            code,
            message: message.into(),
            data: None,
        }
    }

    pub fn with_data(mut self, data: Value) -> Self {
        self.data = Some(data);
        self
    }

    /// Machine-readable error kind carried in `data.kind`.
    pub fn kind(&self) -> Option<&str> {
        self.data.as_ref()?.get("kind")?.as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcResponse {
    pub jsonrpc: String,
    pub id: RpcId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RpcError>,
}

impl RpcResponse {
    pub fn ok(id: RpcId, result: Value) -> Self {
        RpcResponse {
            jsonrpc: "2.0".into(),
            id,
            result: Some(result),
            error: None,
        }
    }

    pub fn err(id: RpcId, error: RpcError) -> Self {
        RpcResponse {
            jsonrpc: "2.0".into(),
            id,
            result: None,
            error: Some(error),
        }
    }

    /// Exactly one of result/error is present.
    pub fn is_well_formed(&self) -> bool {
        self.jsonrpc == "2.0" && (self.result.is_some() != self.error.is_some())
    }
}

pub(crate) fn unknown_session(id: RpcId, session: Option<&str>) -> RpcResponse {
    RpcResponse::err(
        id,
        RpcError::new(
            SESSION_UNKNOWN,
            format!("unknown session {}", session.unwrap_or("<none>")),
        )
        .with_data(json!({"kind": "session_unknown"})),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_untagged() {
        let r = RpcRequest::new(RpcId::Str("a".into()), TOOLS_LIST, Value::Null);
        let back: RpcRequest = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.id, RpcId::Str("a".into()));
        let n: RpcId = serde_json::from_str("7").unwrap();
        assert_eq!(n, RpcId::Num(7));
    }

    #[test]
    fn response_shape() {
        let ok = RpcResponse::ok(1.into(), json!({}));
        assert!(ok.is_well_formed());
        let wire = serde_json::to_value(&ok).unwrap();
        assert!(wire.get("error").is_none());
    }
}
