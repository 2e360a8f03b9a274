//! Certificate records. Field order is fixed: `command`, `verdict`,
//! `witnesses`, `artifacts`, `tool_version`, `input_digest`.

use serde::Serialize;
use serde_json::Value;

pub const TOOL_VERSION: &str = concat!("paradiff ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Fail,
    /// Constructions and queries with nothing to refute.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// The command table as written, keys sorted.
    pub command: Value,
    pub verdict: Verdict,
    pub witnesses: Value,
    pub artifacts: Value,
    pub tool_version: String,
    pub input_digest: String,
}

impl Certificate {
    /// One JSON object, no trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("certificate values are plain JSON")
    }
}

/// One line per certificate, each terminated by a newline.
pub fn to_jsonl(certs: &[Certificate]) -> String {
    certs.iter().map(|c| c.to_line() + "\n").collect()
}
