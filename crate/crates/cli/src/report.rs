use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Summary printed on stdout after every successful run. Contains no
/// timestamps or host details, so identical inputs give identical bytes.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Echo of every argument and input file that shaped the run.
    pub input: Value,
    /// SHA-256 of the compact JSON encoding of `input`.
    pub input_sha256: String,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str, input: Value, results: Value, warnings: Vec<String>) -> Self {
        let encoded = serde_json::to_vec(&input).expect("input echo serializes");
        let input_sha256 = Sha256::digest(&encoded)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        RunReport {
            tool: "trires",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input,
            input_sha256,
            results,
            warnings,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}
