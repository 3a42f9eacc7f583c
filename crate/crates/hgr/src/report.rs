use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Output of every command. `results` depends only on the input bytes, the
/// configuration and seeds; wall-clock measurements go to `timings_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub input_sha256: Option<String>,
    pub config: Value,
    pub results: Value,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, config: Value, input_sha256: Option<String>) -> Report {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256,
            config,
            results: Value::Null,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
