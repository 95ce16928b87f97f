//! Run identifiers.
//!
//! Ids are fixed-width lowercase hex so that lexical order matches creation
//! order: a 12-digit millisecond timestamp (clamped to never go backwards)
//! followed by an 8-digit process-wide sequence number.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

static SEQUENCE: AtomicU64 = AtomicU64::new(0);
static LAST_MS: Mutex<u64> = Mutex::new(0);

/// Returns a process-unique id that sorts in creation order.
pub fn new_run_id() -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    // Hold the lock across both reads so timestamp and sequence advance together.
    let mut last = LAST_MS.lock().unwrap_or_else(|e| e.into_inner());
    let ms = now.max(*last);
    *last = ms;
    let seq = SEQUENCE.fetch_add(1, Ordering::Relaxed);
    format!("{ms:012x}{:08x}", seq & 0xffff_ffff)
}

/// Source of run ids: wall-clock based, or derived from a seed so repeated
/// executions of the same workload produce identical ids.
#[derive(Debug, Default)]
pub enum RunIdGen {
    #[default]
    Clock,
    Seeded {
        seed: u64,
        next: AtomicU64,
    },
}

impl RunIdGen {
    pub fn seeded(seed: u64) -> Self {
        RunIdGen::Seeded {
            seed,
            next: AtomicU64::new(0),
        }
    }

    pub fn next_id(&self) -> String {
        match self {
            RunIdGen::Clock => new_run_id(),
            RunIdGen::Seeded { seed, next } => {
                let n = next.fetch_add(1, Ordering::Relaxed);
                format!("s{seed:016x}{n:08x}")
            }
        }
    }
}
