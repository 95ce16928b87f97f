//! Process-wide switch that forbids live network calls.
//!
//! Every live backend (HTTP LLM, live tool modes) calls [`guard`] before it
//! opens a connection. Loopback targets stay allowed so local gateways and
//! in-test HTTP servers keep working while `--no-network` is in force.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

static DENIED: AtomicBool = AtomicBool::new(false);
static BLOCKED: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("network access disabled: refused live call to {target}")]
pub struct NetworkDenied {
    pub target: String,
}

pub fn set_network_denied(denied: bool) {
    DENIED.store(denied, Ordering::SeqCst);
}

pub fn network_denied() -> bool {
    DENIED.load(Ordering::SeqCst)
}

/// Number of live calls refused since process start.
pub fn blocked_attempts() -> u64 {
    BLOCKED.load(Ordering::SeqCst)
}

/// Checks whether a live call to `url` may proceed.
pub fn guard(url: &str) -> Result<(), NetworkDenied> {
    if !network_denied() || is_loopback(url) {
        return Ok(());
    }
    BLOCKED.fetch_add(1, Ordering::SeqCst);
    Err(NetworkDenied {
        target: url.to_string(),
    })
}

fn is_loopback(url: &str) -> bool {
    let rest = url.split_once("://").map(|(_, r)| r).unwrap_or(url);
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host = if let Some(v6) = authority.strip_prefix('[') {
        v6.split(']').next().unwrap_or("")
    } else {
        authority
            .rsplit_once(':')
            .map(|(h, _)| h)
            .unwrap_or(authority)
    };
    matches!(host, "localhost" | "127.0.0.1" | "::1") || host.starts_with("127.")
}
