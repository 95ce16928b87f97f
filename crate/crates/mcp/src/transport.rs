use std::sync::Arc;
use std::time::Duration;

use crate::http::{HttpRequest, HttpResponse};
use crate::rpc::{RpcRequest, RpcResponse};
use crate::server::{Envelope, McpServer};
use crate::{McpError, SESSION_HEADER};

/// Carries one JSON-RPC exchange to a server.
pub trait Transport: Send + Sync {
    fn roundtrip(&self, req: &RpcRequest, session: Option<&str>) -> Result<Envelope, McpError>;
    fn describe(&self) -> String;
}

/// Direct calls into a server in the same process.
#[derive(Debug, Clone)]
pub struct InProcessTransport {
    server: Arc<McpServer>,
}

impl InProcessTransport {
    pub fn new(server: Arc<McpServer>) -> Self {
        InProcessTransport { server }
    }
}

impl Transport for InProcessTransport {
    fn roundtrip(&self, req: &RpcRequest, session: Option<&str>) -> Result<Envelope, McpError> {
        Ok(self.server.handle(req, session))
    }

    fn describe(&self) -> String {
        format!("in-process:{}", self.server.name())
    }
}

/// Builds the HTTP request for one JSON-RPC exchange.
pub fn encode_http(path: &str, req: &RpcRequest, session: Option<&str>) -> HttpRequest {
    let body = serde_json::to_vec(req).expect("request serializes");
    let mut http = HttpRequest::post(path, body);
    if let Some(sid) = session {
        http = http.with_header(SESSION_HEADER, sid);
    }
    http
}

/// Reads a JSON-RPC response (and session header) out of an HTTP response.
pub fn decode_http(resp: &HttpResponse) -> Result<Envelope, McpError> {
    let response: RpcResponse = serde_json::from_slice(&resp.body).map_err(|e| {
        McpError::MalformedResponse(format!(
            "status {}: {e}: {}",
            resp.status,
            String::from_utf8_lossy(&resp.body)
        ))
    })?;
    if !response.is_well_formed() {
        return Err(McpError::MalformedResponse(
            "response must carry exactly one of result/error".into(),
        ));
    }
    Ok(Envelope {
        response,
        session_id: resp.header(SESSION_HEADER).map(str::to_string),
    })
}

/// JSON-RPC over HTTP POST to a single endpoint.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    url: String,
    bearer: Option<String>,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(url: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            url: url.to_string(),
            bearer: None,
            agent,
        }
    }

    pub fn with_bearer(mut self, token: &str) -> Self {
        self.bearer = Some(token.to_string());
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn send(&self, req: HttpRequest) -> Result<HttpResponse, McpError> {
        agentx_core::net::guard(&self.url).map_err(|e| McpError::Transport(e.to_string()))?;
        let mut call = match req.method.as_str() {
            "DELETE" => {
                let mut c = self.agent.delete(&self.url);
                for (k, v) in &req.headers {
                    c = c.header(k, v);
                }
                if let Some(t) = &self.bearer {
                    c = c.header("Authorization", &format!("Bearer {t}"));
                }
                return Self::read(c.call());
            }
            _ => self.agent.post(&self.url),
        };
        for (k, v) in &req.headers {
            call = call.header(k, v);
        }
        if let Some(t) = &self.bearer {
            call = call.header("Authorization", &format!("Bearer {t}"));
        }
        Self::read(call.send(&req.body[..]))
    }

    fn read(
        r: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<HttpResponse, McpError> {
        let mut resp = r.map_err(|e| McpError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .filter_map(|(k, v)| Some((k.as_str().to_string(), v.to_str().ok()?.to_string())))
            .collect();
        let body = resp
            .body_mut()
            .read_to_vec()
            .map_err(|e| McpError::Transport(e.to_string()))?;
        Ok(HttpResponse {
            status,
            headers,
            body,
        })
    }

    /// HTTP `DELETE` for the session.
    pub fn delete_session(&self, session: &str) -> Result<bool, McpError> {
        let resp = self.send(HttpRequest::delete("").with_header(SESSION_HEADER, session))?;
        Ok(resp.status == 200)
    }
}

impl Transport for HttpTransport {
    fn roundtrip(&self, req: &RpcRequest, session: Option<&str>) -> Result<Envelope, McpError> {
        let resp = self.send(encode_http("", req, session))?;
        decode_http(&resp)
    }

    fn describe(&self) -> String {
        self.url.clone()
    }
}
