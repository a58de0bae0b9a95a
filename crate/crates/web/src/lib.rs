//! Browser demo: analyse a pasted snippet and explore it through the flow
//! table, the data type view and the heatmap.
//!
//! The `*_json` functions are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors into JS exceptions.

use pdflow_core::patterns::Finding;
use pdflow_core::report::emit_mermaid;
use pdflow_core::report::text::{type_tree, Format};
use pdflow_core::rulepack::RulePack;
use pdflow_core::stmt::{Language, SourceFile};
use pdflow_core::taint::{analyze_file, AnalyzeOptions};
use pdflow_core::views::{build_flow_table, build_heatmap, build_type_view, TableKey};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn language(name: &str) -> Result<Language, String> {
    Language::parse(name).ok_or_else(|| format!("unknown language `{name}` (expected java, javascript or typescript)"))
}

fn pack(rules: &str) -> Result<RulePack, String> {
    let default = RulePack::default_pack();
    if rules.trim().is_empty() {
        Ok(default)
    } else {
        default.merged_with_yaml(rules).map_err(|e| e.to_string())
    }
}

fn findings(code: &str, lang: &str, rules: &str, propagation: bool) -> Result<Vec<Finding>, String> {
    let lang = language(lang)?;
    let file = SourceFile::new(format!("snippet.{}", extension(lang)), lang, code);
    Ok(analyze_file(&file, &pack(rules)?, AnalyzeOptions { propagation }).findings)
}

fn extension(lang: Language) -> &'static str {
    match lang {
        Language::Java => "java",
        Language::JavaScript => "js",
        Language::TypeScript => "ts",
    }
}

/// Findings plus the flow table grouped by `group_by`.
pub fn analyze_json(code: &str, lang: &str, rules: &str, group_by: &str, propagation: bool) -> Result<Value, String> {
    let key: TableKey = group_by.parse().map_err(|e| format!("{e}"))?;
    let found = findings(code, lang, rules, propagation)?;
    let table = build_flow_table(&found, key, &[]);
    Ok(json!({ "findings": found, "table": table }))
}

/// The data type tree as structured data, indented text and Mermaid.
pub fn type_view_json(code: &str, lang: &str, rules: &str) -> Result<Value, String> {
    let tree = build_type_view(&findings(code, lang, rules, true)?);
    Ok(json!({
        "text": type_tree(&tree, Format::Text),
        "mermaid": emit_mermaid(&tree),
        "tree": tree,
    }))
}

pub fn heatmap_json(code: &str, lang: &str, rules: &str) -> Result<Value, String> {
    Ok(json!(build_heatmap(&findings(code, lang, rules, true)?)))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Returns `{findings, table}` as a JSON string.
#[wasm_bindgen]
pub fn analyze(code: &str, lang: &str, rules: &str, group_by: &str, propagation: bool) -> Result<String, JsError> {
    to_js(analyze_json(code, lang, rules, group_by, propagation))
}

/// Returns `{tree, text, mermaid}` as a JSON string.
#[wasm_bindgen]
pub fn type_view(code: &str, lang: &str, rules: &str) -> Result<String, JsError> {
    to_js(type_view_json(code, lang, rules))
}

#[wasm_bindgen]
pub fn heatmap(code: &str, lang: &str, rules: &str) -> Result<String, JsError> {
    to_js(heatmap_json(code, lang, rules))
}
