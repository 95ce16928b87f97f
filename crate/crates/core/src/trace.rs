//! Run traces.
//!
//! Every model inference and every tool call of a run becomes one
//! [`TraceEvent`]. Token totals, latency buckets and costs in a
//! [`RunReport`](crate::RunReport) are all recomputed from these events.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Monotonic millisecond clock.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Real elapsed time since construction.
#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        self.origin.elapsed().as_millis() as u64
    }
}

/// Deterministic clock: every reading advances time by a fixed step.
/// Used for replayable golden runs.
#[derive(Debug)]
pub struct LogicalClock {
    now: AtomicU64,
    step: u64,
}

impl LogicalClock {
    pub fn new(step_ms: u64) -> Self {
        LogicalClock {
            now: AtomicU64::new(0),
            step: step_ms,
        }
    }
}

impl Clock for LogicalClock {
    fn now_ms(&self) -> u64 {
        self.now.fetch_add(self.step, Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Actor {
    Agent { name: String },
    Tool { server: String, name: String },
    Framework { name: String },
}

impl Actor {
    pub fn agent(name: &str) -> Self {
        Actor::Agent {
            name: name.to_string(),
        }
    }

    pub fn tool(server: &str, name: &str) -> Self {
        Actor::Tool {
            server: server.to_string(),
            name: name.to_string(),
        }
    }

    pub fn is_agent(&self) -> bool {
        matches!(self, Actor::Agent { .. })
    }

    pub fn is_tool(&self) -> bool {
        matches!(self, Actor::Tool { .. })
    }

    /// Short label for tables: agent name or `server.tool`.
    pub fn label(&self) -> String {
        match self {
            Actor::Agent { name } | Actor::Framework { name } => name.clone(),
            Actor::Tool { server, name } => format!("{server}.{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub run_id: String,
    pub actor: Actor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub start_ms: u64,
    pub end_ms: u64,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub payload_digest: String,
}

impl TraceEvent {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }
}

/// SHA-256 hex digest of the compact JSON serialization of `v`.
pub fn digest_json<T: Serialize + ?Sized>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).unwrap_or_default();
    hex::encode(Sha256::digest(&bytes))
}

struct TracerState {
    events: Vec<TraceEvent>,
    stage: Option<usize>,
}

/// Single run's trace recorder. Cheap to clone; clones share the log.
#[derive(Clone)]
pub struct Tracer {
    run_id: Arc<str>,
    clock: Arc<dyn Clock>,
    state: Arc<Mutex<TracerState>>,
}

impl std::fmt::Debug for Tracer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tracer")
            .field("run_id", &self.run_id)
            .finish()
    }
}

/// Start mark returned by [`Tracer::begin`].
#[derive(Debug, Clone, Copy)]
pub struct Span {
    start_ms: u64,
}

impl Tracer {
    pub fn new(run_id: impl Into<String>, clock: Arc<dyn Clock>) -> Self {
        Tracer {
            run_id: Arc::from(run_id.into()),
            clock,
            state: Arc::new(Mutex::new(TracerState {
                events: Vec::new(),
                stage: None,
            })),
        }
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    pub fn begin(&self) -> Span {
        Span {
            start_ms: self.clock.now_ms(),
        }
    }

    pub fn stage(&self) -> Option<usize> {
        self.lock().stage
    }

    /// Tags subsequent events with a stage index.
    pub fn set_stage(&self, stage: Option<usize>) {
        self.lock().stage = stage;
    }

    /// Closes `span` and appends the event. Returns the event's sequence number.
    pub fn finish(
        &self,
        span: Span,
        actor: Actor,
        label: Option<&str>,
        tokens: (u64, u64),
        payload_digest: String,
    ) -> u64 {
        let end_ms = self.clock.now_ms().max(span.start_ms);
        let mut st = self.lock();
        let seq = st.events.len() as u64;
        let stage = st.stage;
        st.events.push(TraceEvent {
            seq,
            run_id: self.run_id.to_string(),
            actor,
            stage,
            label: label.map(str::to_string),
            start_ms: span.start_ms,
            end_ms,
            tokens_in: tokens.0,
            tokens_out: tokens.1,
            payload_digest,
        });
        seq
    }

    pub fn events(&self) -> Vec<TraceEvent> {
        self.lock().events.clone()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, TracerState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logical_clock_is_deterministic() {
        let a = LogicalClock::new(2);
        assert_eq!((a.now_ms(), a.now_ms(), a.now_ms()), (0, 2, 4));
    }

    #[test]
    fn events_ordered_and_tagged() {
        let t = Tracer::new("r1", Arc::new(LogicalClock::new(1)));
        t.set_stage(Some(0));
        let s = t.begin();
        t.finish(s, Actor::agent("planner"), None, (10, 2), "d".into());
        t.set_stage(Some(1));
        let s = t.begin();
        t.finish(s, Actor::tool("fetch", "fetch"), None, (0, 0), "e".into());
        let ev = t.events();
        assert_eq!(ev.len(), 2);
        assert!(ev[0].start_ms < ev[1].start_ms);
        assert!(ev.iter().all(|e| e.end_ms >= e.start_ms));
        assert_eq!(ev[0].stage, Some(0));
        assert_eq!(ev[1].stage, Some(1));
    }

    #[test]
    fn digest_is_stable() {
        let d1 = digest_json(&serde_json::json!({"a": 1}));
        let d2 = digest_json(&serde_json::json!({"a": 1}));
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 64);
    }
}
