use serde::{Deserialize, Serialize};

use crate::FaasError;

fn default_storage() -> u32 {
    512
}

/// One function unit: which server it hosts and what it is provisioned with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionManifest {
    pub server: String,
    pub memory_mb: u32,
    #[serde(default = "default_storage")]
    pub ephemeral_storage_mb: u32,
    pub handler: String,
    /// Delay added to the first invocation of the function.
    #[serde(default)]
    pub cold_start_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<String>,
    /// Size of the upstream server's full tool surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advertised_tools: Option<u32>,
}

impl FunctionManifest {
    pub fn new(server: &str, memory_mb: u32) -> Self {
        FunctionManifest {
            server: server.to_string(),
            memory_mb,
            ephemeral_storage_mb: default_storage(),
            handler: server.to_string(),
            cold_start_ms: 0,
            origin: None,
            execution: None,
            advertised_tools: None,
        }
    }

    pub fn validate(&self) -> Result<(), FaasError> {
        if !valid_memory(self.memory_mb) {
            return Err(FaasError::InvalidManifest(format!(
                "{}: memory_mb {} is not a power of two in 128..=10240",
                self.server, self.memory_mb
            )));
        }
        if self.ephemeral_storage_mb < 512 {
            return Err(FaasError::InvalidManifest(format!(
                "{}: ephemeral storage below 512 MB",
                self.server
            )));
        }
        Ok(())
    }
}

pub fn valid_memory(mb: u32) -> bool {
    (128..=10_240).contains(&mb) && mb.is_power_of_two()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestFile {
    schema: String,
    functions: Vec<FunctionManifest>,
}

pub fn parse_manifests(json: &str) -> Result<Vec<FunctionManifest>, FaasError> {
    let f: ManifestFile =
        serde_json::from_str(json).map_err(|e| FaasError::InvalidManifest(e.to_string()))?;
    if f.schema != "functions.v1" {
        return Err(FaasError::InvalidManifest(format!(
            "unsupported manifest schema {}",
            f.schema
        )));
    }
    for m in &f.functions {
        m.validate()?;
    }
    Ok(f.functions)
}

/// Provisioning of the eight built-in servers. The filesystem server has no
/// published FaaS sizing; it gets the smallest allocation.
pub fn builtin_manifests() -> Vec<FunctionManifest> {
    parse_manifests(include_str!("../manifests/builtin.json")).expect("bundled manifest is valid")
}
