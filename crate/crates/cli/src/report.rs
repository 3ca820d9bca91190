use std::time::Duration;

use ample_comparison::records::Certificate;
use serde::{Deserialize, Serialize};

pub const TOOL: &str = concat!("ample ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub name: String,
    /// The system file text, enough to rebuild the presentation.
    pub description: String,
}

/// Every search is deterministic; the record says so instead of storing a seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub deterministic: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub command: Vec<String>,
    pub seed: SeedRecord,
    pub system: Option<SystemRecord>,
    pub parameters: serde_json::Value,
    pub outcome: String,
    pub summary: String,
    pub certificates: Vec<Certificate>,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: Vec<String>, system: Option<SystemRecord>, parameters: serde_json::Value) -> Self {
        Report {
            tool: TOOL.to_string(),
            command,
            seed: SeedRecord {
                deterministic: true,
                seed: None,
            },
            system,
            parameters,
            outcome: String::new(),
            summary: String::new(),
            certificates: Vec::new(),
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    pub fn finish(mut self, outcome: &str, summary: impl Into<String>, elapsed: Duration) -> Self {
        self.outcome = outcome.to_string();
        self.summary = summary.into();
        self.timing.elapsed_ms = elapsed.as_secs_f64() * 1e3;
        self
    }
}

/// 0 for verified or feasible, 1 for refuted or infeasible, 2 otherwise.
pub fn exit_code(outcome: &str) -> u8 {
    match outcome {
        "verified" | "feasible" => 0,
        "refuted" | "infeasible" => 1,
        _ => 2,
    }
}
