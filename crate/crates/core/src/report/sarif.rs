use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::{to_canonical_string, FindingsDocument, TOOL_NAME};
use crate::patterns::{Confidence, Finding};

const SARIF_SCHEMA: &str = "https://json.schemastore.org/sarif-2.1.0.json";

/// `pdflow/<source categories>/<sink category>/<shape>`; several source
/// categories are joined with `+`.
pub fn rule_id(f: &Finding) -> String {
    let sources: Vec<&str> = f.source.categories.iter().map(|c| c.abbreviation()).collect();
    format!(
        "{TOOL_NAME}/{}/{}/{}",
        sources.join("+"),
        f.sink.category.abbreviation(),
        f.instance.shape.name()
    )
}

/// Percent-encodes everything outside RFC 3986 unreserved characters and `/`.
fn encode_uri_path(path: &str) -> String {
    let mut out = String::with_capacity(path.len());
    for b in path.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~' | b'/') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn message(f: &Finding) -> String {
    let cats: Vec<&str> = f.source.categories.iter().map(|c| c.abbreviation()).collect();
    format!(
        "Personal data `{}` ({}) flows to sink `{}` ({}): {}",
        f.source.display,
        cats.join("+"),
        f.sink.text,
        f.sink.category.abbreviation(),
        f.instance.rendered
    )
}

struct RuleEntry<'a> {
    example: &'a Finding,
    pairs: BTreeSet<(String, String)>,
}

pub fn sarif_value(doc: &FindingsDocument) -> Value {
    let mut rules: BTreeMap<String, RuleEntry> = BTreeMap::new();
    for f in &doc.findings {
        let entry = rules.entry(rule_id(f)).or_insert_with(|| RuleEntry {
            example: f,
            pairs: BTreeSet::new(),
        });
        for p in &f.participants {
            entry.pairs.insert((p.source.rule_id.clone(), f.sink.rule_id.clone()));
        }
    }
    let index: BTreeMap<&str, usize> = rules.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();

    let rule_values: Vec<Value> = rules
        .iter()
        .map(|(id, entry)| {
            let f = entry.example;
            let cats: Vec<&str> = f.source.categories.iter().map(|c| c.label()).collect();
            let shape = f.instance.shape;
            json!({
                "id": id,
                "name": format!("{}To{}{}", cats.join("And").replace(' ', ""), f.sink.category.label().replace([' ', '/'], ""), shape.name()),
                "shortDescription": {
                    "text": format!("{} data reaches a {} sink ({})", cats.join(" + "), f.sink.category.label(), shape.name()),
                },
                "fullDescription": {
                    "text": format!("{} {}", shape.notation(), shape.description()),
                },
                "defaultConfiguration": { "level": "warning" },
                "properties": {
                    "sourceCategories": f.source.categories.iter().map(|c| c.abbreviation()).collect::<Vec<_>>(),
                    "sinkCategory": f.sink.category.abbreviation(),
                    "flowPattern": shape.name(),
                    "rulePairs": entry.pairs.iter().map(|(s, k)| json!({"source": s, "sink": k})).collect::<Vec<_>>(),
                },
            })
        })
        .collect();

    let results: Vec<Value> = doc
        .findings
        .iter()
        .map(|f| {
            let id = rule_id(f);
            let level = match f.confidence {
                Confidence::High => "warning",
                Confidence::Low => "note",
            };
            json!({
                "ruleId": id,
                "ruleIndex": index[id.as_str()],
                "level": level,
                "message": { "text": message(f) },
                "locations": [{
                    "physicalLocation": {
                        "artifactLocation": {
                            "uri": encode_uri_path(&f.path),
                            "uriBaseId": "SRCROOT",
                        },
                        "region": {
                            "startLine": f.span.start_line,
                            "startColumn": f.span.start_col,
                            "endLine": f.span.end_line,
                            "endColumn": f.span.end_col,
                            "snippet": { "text": f.snippet },
                        },
                    },
                }],
                "partialFingerprints": { "pdflowFindingId/v1": f.id },
                "properties": {
                    "findingId": f.id,
                    "source": f.source.display,
                    "sourceStem": f.source.stem,
                    "sink": f.sink.text,
                    "flowPatternInstance": f.instance.rendered,
                    "confidence": f.confidence.name(),
                },
            })
        })
        .collect();

    json!({
        "$schema": SARIF_SCHEMA,
        "version": "2.1.0",
        "runs": [{
            "tool": {
                "driver": {
                    "name": doc.tool.name,
                    "version": doc.tool.version,
                    "rules": rule_values,
                    "properties": { "rulepackVersion": doc.tool.rulepack_version },
                },
            },
            "columnKind": "unicodeCodePoints",
            "results": results,
        }],
    })
}

pub fn emit_sarif(doc: &FindingsDocument) -> String {
    to_canonical_string(sarif_value(doc))
}
