use pdflow_core::report::{emit_sarif, rule_id, sarif_value, FindingsDocument};
use pdflow_core::rulepack::RulePack;
use pdflow_core::stmt::{Language, SourceFile};
use pdflow_core::taint::{analyze_file, AnalyzeOptions};
use proptest::prelude::*;
use serde_json::Value;

fn validator() -> &'static jsonschema::Validator {
    static V: std::sync::OnceLock<jsonschema::Validator> = std::sync::OnceLock::new();
    V.get_or_init(|| {
        let text = include_str!("data/sarif-schema-2.1.0.json");
        let schema: Value = serde_json::from_str(text).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    })
}

fn assert_valid(doc: &Value) {
    let errors: Vec<String> = validator().iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema errors: {errors:#?}");
}

fn document(path: &str, lang: Language, src: &str) -> FindingsDocument {
    let pack = RulePack::default_pack();
    let r = analyze_file(&SourceFile::new(path, lang, src), &pack, AnalyzeOptions::default());
    FindingsDocument::new(pack.version(), ".", r.findings)
}

#[test]
fn fixtures_produce_valid_sarif() {
    for (name, lang, src) in [
        ("pattern_catalog.js", Language::JavaScript, include_str!("../fixtures/pattern_catalog.js")),
        ("user_service.ts", Language::TypeScript, include_str!("../fixtures/user_service.ts")),
    ] {
        let doc = document(name, lang, src);
        assert!(!doc.findings.is_empty());
        let v = sarif_value(&doc);
        assert_valid(&v);
        let results = v["runs"][0]["results"].as_array().unwrap();
        assert_eq!(results.len(), doc.findings.len());
        for (r, f) in results.iter().zip(&doc.findings) {
            assert_eq!(r["ruleId"], rule_id(f));
            let rules = v["runs"][0]["tool"]["driver"]["rules"].as_array().unwrap();
            let idx = r["ruleIndex"].as_u64().unwrap() as usize;
            assert_eq!(rules[idx]["id"], r["ruleId"]);
        }
    }
}

#[test]
fn empty_document_is_valid() {
    assert_valid(&sarif_value(&FindingsDocument::new("1", ".", vec![])));
}

#[test]
fn emitted_text_is_stable() {
    let doc = document("a.js", Language::JavaScript, "send(email);\nlog(password);\n");
    assert_eq!(emit_sarif(&doc), emit_sarif(&doc));
    let parsed: Value = serde_json::from_str(&emit_sarif(&doc)).unwrap();
    assert_eq!(parsed, sarif_value(&doc));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn odd_paths_and_snippets_stay_valid(
        dir in "[a-zA-Z ü%#?]{1,8}",
        name in prop::sample::select(vec!["x.js", "é y.ts", "A.java"]),
        extra in "[a-z\"'`<>&\\\\ ]{0,10}",
    ) {
        let lang = Language::from_path(std::path::Path::new(name)).unwrap();
        let src = format!("send(email, \"{}\");\nconsole.log(`{extra}`, password);\n", extra.replace('"', ""));
        let doc = document(&format!("{dir}/{name}"), lang, &src);
        let v = sarif_value(&doc);
        prop_assert!(validator().is_valid(&v));
        for r in v["runs"][0]["results"].as_array().unwrap() {
            let uri = r["locations"][0]["physicalLocation"]["artifactLocation"]["uri"].as_str().unwrap();
            prop_assert!(uri.bytes().all(|b| b.is_ascii_graphic()));
            prop_assert!(!uri.contains(' ') && !uri.contains('#') && !uri.contains('?'));
        }
    }
}

#[test]
fn validator_rejects_malformed_logs() {
    let mut v = sarif_value(&document("a.js", Language::JavaScript, "send(email);"));
    assert!(validator().is_valid(&v));
    v["runs"][0]["results"][0]["level"] = Value::from("loud");
    assert!(!validator().is_valid(&v));
    assert!(!validator().is_valid(&serde_json::json!({"version": "1.0", "runs": []})));
}
