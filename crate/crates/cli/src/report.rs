//! Verdicts and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;
use crate::io::write_atomic;

/// Outcome of one named check, with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Wall time spent, reported outside the CSV bodies.
    pub seconds: f64,
}

impl Verdict {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), pass: true, metrics: BTreeMap::new(), seconds: 0.0 }
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn get(&self, key: &str) -> f64 {
        self.metrics.get(key).copied().unwrap_or(f64::NAN)
    }
}

pub fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Record of one invocation, written last and atomically.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub config: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialises");
        write_atomic(path, json.as_bytes())
    }
}

/// JSON document listing verdicts; used for the per-scenario reports.
pub fn verdict_json(scenario: &str, verdicts: &[Verdict]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        scenario: &'a str,
        pass: bool,
        properties: &'a [Verdict],
    }
    let doc = Doc { scenario, pass: verdicts.iter().all(|v| v.pass), properties: verdicts };
    serde_json::to_string_pretty(&doc).expect("verdicts serialise")
}
