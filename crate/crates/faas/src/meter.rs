use std::sync::Mutex;

use agentx_core::Decimal;
use serde::{Deserialize, Serialize};

pub const METER_SCHEMA: &str = "faas_meter.v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub duration_ms: u64,
    pub memory_mb: u32,
    pub billed_usd: Decimal,
}

/// Append-only invocation log.
#[derive(Debug, Default)]
pub struct Meter {
    records: Mutex<Vec<InvocationRecord>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeterDump {
    pub schema: String,
    pub total_usd: Decimal,
    pub invocations: Vec<InvocationRecord>,
}

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&self, r: InvocationRecord) {
        self.records
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(r);
    }

    pub fn records(&self) -> Vec<InvocationRecord> {
        self.records
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn total(&self) -> Decimal {
        self.records().iter().map(|r| r.billed_usd).sum()
    }

    /// Records belonging to any of `sessions`.
    pub fn for_sessions(&self, sessions: &[String]) -> Vec<InvocationRecord> {
        self.records()
            .into_iter()
            .filter(|r| r.session_id.as_ref().is_some_and(|s| sessions.contains(s)))
            .collect()
    }

    pub fn dump(&self) -> MeterDump {
        let invocations = self.records();
        MeterDump {
            schema: METER_SCHEMA.into(),
            total_usd: invocations.iter().map(|r| r.billed_usd).sum(),
            invocations,
        }
    }

    pub fn write_to(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(
            path,
            serde_json::to_vec_pretty(&self.dump()).expect("serializes"),
        )
    }
}
