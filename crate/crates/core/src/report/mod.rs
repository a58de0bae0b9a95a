//! Serialization of scan results: canonical findings JSON, SARIF 2.1.0,
//! Mermaid and text/markdown renderings.

mod mermaid;
mod sarif;
pub mod text;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::patterns::Finding;

pub use mermaid::emit_mermaid;
pub use sarif::{emit_sarif, rule_id, sarif_value};

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_NAME: &str = "pdflow";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("findings document does not match the expected schema: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub rulepack_version: String,
}

impl ToolInfo {
    pub fn new(rulepack_version: &str) -> Self {
        ToolInfo {
            name: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rulepack_version: rulepack_version.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStats {
    pub files: usize,
    pub skipped_files: usize,
    pub statements: usize,
    pub findings: usize,
    pub source_only: usize,
    pub sink_only: usize,
    pub inner_sinks: usize,
    pub unclassifiable: usize,
    /// Only recorded on request so that documents stay byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub propagation: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { propagation: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingsDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// Directory that finding paths are relative to, as given to the scanner.
    pub root: String,
    pub options: ScanOptions,
    pub stats: ScanStats,
    pub findings: Vec<Finding>,
}

impl FindingsDocument {
    pub fn new(rulepack_version: &str, root: &str, findings: Vec<Finding>) -> Self {
        FindingsDocument {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::new(rulepack_version),
            root: root.to_string(),
            options: ScanOptions::default(),
            stats: ScanStats {
                findings: findings.len(),
                ..ScanStats::default()
            },
            findings,
        }
    }

    pub fn finding(&self, id: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.id == id)
    }
}

/// Recursively sorts object keys.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_string(value: Value) -> String {
    let mut out = serde_json::to_string_pretty(&canonicalize(value)).expect("JSON values always serialize");
    out.push('\n');
    out
}

pub fn emit_findings_json(doc: &FindingsDocument) -> String {
    to_canonical_string(serde_json::to_value(doc).expect("findings document serializes"))
}

pub fn load_findings_json(text: &str) -> Result<FindingsDocument, ReportError> {
    let doc: FindingsDocument =
        serde_json::from_str(text).map_err(|e| ReportError::SchemaMismatch(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ReportError::SchemaMismatch(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    Ok(doc)
}
