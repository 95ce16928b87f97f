//! Function-URL style gateway: routes HTTP requests to deployed functions
//! and meters every invocation.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use agentx_core::Decimal;
use agentx_mcp::http::{HttpRequest, HttpResponse, HttpService};
use agentx_mcp::rpc::{self, RpcRequest};
use agentx_mcp::{decode_http, encode_http, Envelope, McpError, Transport, SESSION_HEADER};
use serde_json::json;

use crate::cost::{billed_ms, faas_cost};
use crate::deploy::Deployment;
use crate::meter::{InvocationRecord, Meter};
use crate::FaasError;

#[derive(Debug)]
pub struct Gateway {
    deployment: Deployment,
    meter: Arc<Meter>,
    rate: Decimal,
    warm: Mutex<HashSet<String>>,
}

impl Gateway {
    pub fn new(deployment: Deployment, rate: Decimal) -> Self {
        Gateway {
            deployment,
            meter: Arc::new(Meter::new()),
            rate,
            warm: Mutex::default(),
        }
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn meter(&self) -> &Arc<Meter> {
        &self.meter
    }

    pub fn rate(&self) -> Decimal {
        self.rate
    }

    /// Handles one HTTP request. Unknown routes get 404 and no record.
    pub fn invoke(&self, req: &HttpRequest) -> (HttpResponse, Option<InvocationRecord>) {
        let Some(unit) = self.deployment.route(&req.path) else {
            return (HttpResponse::text(404, "no such function"), None);
        };
        let started = Instant::now();
        let cold = self
            .warm
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(unit.name.clone());
        if cold && unit.cold_start_ms > 0 {
            std::thread::sleep(Duration::from_millis(unit.cold_start_ms));
        }
        let resp = catch_unwind(AssertUnwindSafe(|| unit.runtime.handle_http(req)))
            .unwrap_or_else(|_| HttpResponse::text(500, "function crashed"));
        let duration_ms = billed_ms(started.elapsed());
        let record = InvocationRecord {
            function: unit.name.clone(),
            session_id: req
                .header(SESSION_HEADER)
                .or_else(|| resp.header(SESSION_HEADER))
                .map(str::to_string),
            duration_ms,
            memory_mb: unit.memory_mb,
            billed_usd: faas_cost(duration_ms, unit.memory_mb, self.rate),
        };
        self.meter.append(record.clone());
        (resp, Some(record))
    }

    pub fn http_service(self: &Arc<Self>) -> HttpService {
        let gw = self.clone();
        Arc::new(move |req| gw.invoke(&req).0)
    }

    fn unit_name(&self, function_or_server: &str) -> Result<String, FaasError> {
        self.deployment
            .function(function_or_server)
            .or_else(|| self.deployment.function_for_server(function_or_server))
            .map(|f| f.name.clone())
            .ok_or_else(|| FaasError::UnknownFunction(function_or_server.to_string()))
    }

    /// Opens a session on the function hosting `server`.
    pub fn initialize_session(
        &self,
        server: &str,
        app_instance: &str,
    ) -> Result<String, FaasError> {
        let name = self.unit_name(server)?;
        let req = RpcRequest::new(1, rpc::INITIALIZE, json!({"app_instance": app_instance}));
        let (resp, _) = self.invoke(&encode_http(&crate::route_for(&name), &req, None));
        let env = decode_http(&resp).map_err(|e| FaasError::StoreUnavailable(e.to_string()))?;
        match (env.session_id, env.response.error) {
            (Some(sid), None) => Ok(sid),
            (_, Some(e)) => Err(FaasError::StoreUnavailable(e.message)),
            _ => Err(FaasError::StoreUnavailable("no session id returned".into())),
        }
    }

    pub fn delete_session(&self, server: &str, session_id: &str) -> Result<(), FaasError> {
        let name = self.unit_name(server)?;
        let req =
            HttpRequest::delete(&crate::route_for(&name)).with_header(SESSION_HEADER, session_id);
        match self.invoke(&req).0.status {
            200 => Ok(()),
            _ => Err(FaasError::SessionUnknown(session_id.to_string())),
        }
    }

    pub fn transport(self: &Arc<Self>, function: &str) -> Result<FaasTransport, FaasError> {
        let name = self.unit_name(function)?;
        Ok(FaasTransport {
            gateway: self.clone(),
            function: name,
        })
    }

    /// One transport per deployed function.
    pub fn transports(self: &Arc<Self>) -> Vec<Arc<dyn Transport>> {
        self.deployment
            .functions
            .iter()
            .map(|f| {
                Arc::new(FaasTransport {
                    gateway: self.clone(),
                    function: f.name.clone(),
                }) as Arc<dyn Transport>
            })
            .collect()
    }
}

/// Reaches a function through the gateway without a socket.
#[derive(Debug, Clone)]
pub struct FaasTransport {
    gateway: Arc<Gateway>,
    function: String,
}

impl Transport for FaasTransport {
    fn roundtrip(&self, req: &RpcRequest, session: Option<&str>) -> Result<Envelope, McpError> {
        let http = encode_http(&crate::route_for(&self.function), req, session);
        let (resp, _) = self.gateway.invoke(&http);
        if resp.status == 404 && resp.header("content-type") == Some("text/plain") {
            return Err(McpError::Transport(format!(
                "no route for {}",
                self.function
            )));
        }
        decode_http(&resp)
    }

    fn describe(&self) -> String {
        format!("faas:{}", self.function)
    }
}
