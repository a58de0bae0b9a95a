//! Reviewer labels and per-cell precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::report::FindingsDocument;
use crate::rulepack::{SinkCategory, SourceCategory};

/// Cells with fewer reviewed findings than this render as `-`.
pub const DEFAULT_SUPPRESSION_THRESHOLD: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum TriageError {
    #[error("malformed labels file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "TP", alias = "tp")]
    Tp,
    #[serde(rename = "FP", alias = "fp")]
    Fp,
    #[serde(rename = "Unreviewed", alias = "unreviewed")]
    Unreviewed,
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tp" => Ok(Verdict::Tp),
            "fp" => Ok(Verdict::Fp),
            "unreviewed" | "none" => Ok(Verdict::Unreviewed),
            _ => Err(format!("unknown verdict `{s}` (expected TP, FP or Unreviewed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageLabel {
    pub finding_id: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewer: Option<String>,
    /// RFC 3339 time of the judgement.
    #[serde(default)]
    pub timestamp: String,
}

/// Labels file contents: a JSON list, at most one entry per finding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelStore {
    labels: Vec<TriageLabel>,
}

impl LabelStore {
    pub fn parse(text: &str) -> Result<LabelStore, TriageError> {
        if text.trim().is_empty() {
            return Ok(LabelStore::default());
        }
        let raw: Vec<TriageLabel> = serde_json::from_str(text).map_err(|e| TriageError::Parse(e.to_string()))?;
        let mut store = LabelStore::default();
        for label in raw {
            store.upsert(label);
        }
        Ok(store)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.labels).expect("labels serialize");
        out.push('\n');
        out
    }

    /// Replaces any earlier label for the same finding.
    pub fn upsert(&mut self, label: TriageLabel) {
        self.labels.retain(|l| l.finding_id != label.finding_id);
        self.labels.push(label);
    }

    pub fn labels(&self) -> &[TriageLabel] {
        &self.labels
    }

    pub fn get(&self, finding_id: &str) -> Option<&TriageLabel> {
        self.labels.iter().find(|l| l.finding_id == finding_id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDocument {
    pub verdicts: BTreeMap<String, Verdict>,
    /// One message per label whose finding id is not in the document.
    pub warnings: Vec<String>,
}

impl LabeledDocument {
    pub fn verdict(&self, finding_id: &str) -> Verdict {
        self.verdicts.get(finding_id).copied().unwrap_or(Verdict::Unreviewed)
    }
}

/// Applies labels in order; a later label for the same finding wins.
pub fn apply_labels(doc: &FindingsDocument, labels: &[TriageLabel]) -> LabeledDocument {
    let known: BTreeSet<&str> = doc.findings.iter().map(|f| f.id.as_str()).collect();
    let mut out = LabeledDocument::default();
    let mut warned = BTreeSet::new();
    for label in labels {
        if !known.contains(label.finding_id.as_str()) {
            if warned.insert(label.finding_id.clone()) {
                out.warnings.push(format!("label for unknown finding `{}`", label.finding_id));
            }
            continue;
        }
        out.verdicts.insert(label.finding_id.clone(), label.verdict);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCell {
    pub source_category: SourceCategory,
    pub sink_category: SinkCategory,
    pub tp: usize,
    pub fp: usize,
    pub precision: Option<f64>,
    pub suppressed: bool,
}

impl PrecisionCell {
    pub fn reviewed(&self) -> usize {
        self.tp + self.fp
    }
}

impl fmt::Display for PrecisionCell {
    /// `-` when suppressed, otherwise two decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.suppressed, self.precision) {
            (false, Some(p)) => write!(f, "{p:.2}"),
            _ => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionTable {
    pub threshold: usize,
    /// Row-major: `cells[source.index() * 6 + sink.index()]`.
    pub cells: Vec<PrecisionCell>,
    pub reviewed: usize,
    pub total: usize,
    /// Reviewed share of all findings, 0 when there are none.
    pub coverage: f64,
}

impl PrecisionTable {
    pub fn cell(&self, source: SourceCategory, sink: SinkCategory) -> &PrecisionCell {
        &self.cells[source.index() * SinkCategory::ALL.len() + sink.index()]
    }
}

/// Precision per (source category, sink category). Unreviewed findings are
/// left out; a finding with several source categories counts in each row.
pub fn precision_table(doc: &FindingsDocument, labeled: &LabeledDocument, threshold: usize) -> PrecisionTable {
    let mut counts = vec![(0usize, 0usize); SourceCategory::ALL.len() * SinkCategory::ALL.len()];
    let mut reviewed = 0;
    for f in &doc.findings {
        let verdict = labeled.verdict(&f.id);
        if verdict == Verdict::Unreviewed {
            continue;
        }
        reviewed += 1;
        for c in &f.source.categories {
            let cell = &mut counts[c.index() * SinkCategory::ALL.len() + f.sink.category.index()];
            match verdict {
                Verdict::Tp => cell.0 += 1,
                Verdict::Fp => cell.1 += 1,
                Verdict::Unreviewed => {}
            }
        }
    }
    let mut cells = Vec::with_capacity(counts.len());
    for source in SourceCategory::ALL {
        for sink in SinkCategory::ALL {
            let (tp, fp) = counts[source.index() * SinkCategory::ALL.len() + sink.index()];
            let total = tp + fp;
            cells.push(PrecisionCell {
                source_category: source,
                sink_category: sink,
                tp,
                fp,
                precision: (total > 0).then(|| tp as f64 / total as f64),
                suppressed: total < threshold,
            });
        }
    }
    let total = doc.findings.len();
    PrecisionTable {
        threshold,
        cells,
        reviewed,
        total,
        coverage: if total == 0 { 0.0 } else { reviewed as f64 / total as f64 },
    }
}
