//! Machine-readable result documents.
//!
//! Every run emits `{meta, inputs, results}`: `meta` identifies the run
//! (seed, version, command, timestamp), `inputs` echoes every resolved
//! parameter, `results` carries the command payload. Serialization is
//! deterministic — maps are ordered and the timestamp comes from
//! `SOURCE_DATE_EPOCH` (absent otherwise) — so identical (config, seed)
//! runs produce byte-identical files.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub version: &'static str,
    pub command: &'static str,
    /// Unix seconds from `SOURCE_DATE_EPOCH`; null unless the variable is
    /// set, keeping default output reproducible byte-for-byte.
    pub timestamp: Option<u64>,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self {
            seed,
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp: std::env::var("SOURCE_DATE_EPOCH")
                .ok()
                .and_then(|v| v.parse().ok()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDoc {
    pub meta: Meta,
    pub inputs: Map<String, Value>,
    pub results: Value,
}

impl ResultDoc {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result docs always serialize");
        s.push('\n');
        s
    }
}

/// Convenience builder for the `inputs` echo map.
#[derive(Debug, Default)]
pub struct Inputs(pub Map<String, Value>);

impl Inputs {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.insert(key.to_string(), json_f64(v));
        self
    }

    pub fn int(&mut self, key: &str, v: u64) -> &mut Self {
        self.0.insert(key.to_string(), Value::from(v));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.0.insert(key.to_string(), Value::from(v));
        self
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.0.insert(key.to_string(), Value::from(v));
        self
    }
}

/// JSON has no encoding for non-finite numbers; those fall back to strings.
pub fn json_f64(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(v.to_string()))
}
