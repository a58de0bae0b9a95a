//! Intra-procedural source/sink identification with single-pass forward
//! propagation through solid flows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::patterns::{
    classify, Confidence, Finding, FlowShape, Participant, Position, SinkRef, SourceOrigin,
    SourceRef,
};
use crate::rulepack::{RulePack, SourceCategory};
use crate::stmt::{extract_statements, CallExpr, SourceFile, Statement, StatementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Derive new sources from solid flows into non-source targets.
    pub propagation: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { propagation: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaintedVar {
    pub name: String,
    pub categories: Vec<SourceCategory>,
    pub stem: String,
    /// Id of the finding whose flow derived this variable.
    pub derived_from: String,
    pub confidence: Confidence,
}

/// Scope-local set of derived sources. Grows monotonically.
#[derive(Debug, Clone, Default)]
pub struct TaintSet {
    vars: BTreeMap<String, TaintedVar>,
}

impl TaintSet {
    pub fn get(&self, name: &str) -> Option<&TaintedVar> {
        self.vars.get(name)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Adds `var` unless the name is already tainted.
    pub fn insert(&mut self, var: TaintedVar) {
        self.vars.entry(var.name.clone()).or_insert(var);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Target,
    Receiver,
    Arg,
}

/// Resolves an identifier chain to a source. Rule matches on the final
/// segment win, then (except for receivers) rule matches on earlier
/// segments, then the taint set.
pub fn category_of(chain: &[String], role: Role, taint: &TaintSet, pack: &RulePack) -> Option<SourceRef> {
    if chain.is_empty() {
        return None;
    }
    let display = chain.join(".");
    let from_rule = |k: usize| {
        pack.match_source(&chain[k]).map(|m| SourceRef {
            display: display.clone(),
            matched: chain[k..].join("."),
            stem: m.stem.to_string(),
            categories: vec![m.rule.category],
            rule_id: m.rule.id.clone(),
            origin: SourceOrigin::Seeded,
            confidence: Confidence::High,
        })
    };
    let last_idx = chain.len() - 1;
    if let Some(found) = from_rule(last_idx) {
        return Some(found);
    }
    let candidates: Vec<usize> = match role {
        Role::Receiver => Vec::new(),
        _ => (0..last_idx).rev().collect(),
    };
    for &k in &candidates {
        if let Some(found) = from_rule(k) {
            return Some(found);
        }
    }
    let taint_candidates: Vec<usize> = match role {
        Role::Receiver => vec![last_idx],
        _ => (0..=last_idx).rev().collect(),
    };
    for k in taint_candidates {
        if let Some(var) = taint.get(&chain[k]) {
            return Some(SourceRef {
                display: display.clone(),
                matched: chain[k..].join("."),
                stem: var.stem.clone(),
                categories: var.categories.clone(),
                rule_id: format!("derived:{}", var.name),
                origin: SourceOrigin::Derived {
                    from: var.derived_from.clone(),
                },
                confidence: var.confidence,
            });
        }
    }
    None
}

/// A statement with at least one source and a sink on its outermost call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFlow {
    pub statement: Statement,
    /// Ordered receiver, target, then arguments.
    pub sources: Vec<Participant>,
    pub sink: SinkRef,
}

impl RawFlow {
    /// First argument source, else the receiver, else the target.
    pub fn primary(&self) -> &Participant {
        self.sources
            .iter()
            .find(|p| p.position.is_arg())
            .or_else(|| self.sources.iter().find(|p| p.position == Position::Receiver))
            .unwrap_or(&self.sources[0])
    }

    pub fn confidence(&self) -> Confidence {
        self.sources
            .iter()
            .fold(Confidence::High, |acc, p| acc.and(p.source.confidence))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeStats {
    /// Statements with a source but no sink.
    pub source_only: usize,
    /// Statements with a sink but no source.
    pub sink_only: usize,
    /// Sink matches on calls other than the outermost one.
    pub inner_sinks: usize,
    /// Statements not classifiable into a flow pattern.
    pub unclassifiable: usize,
}

impl std::ops::AddAssign for ScopeStats {
    fn add_assign(&mut self, o: ScopeStats) {
        self.source_only += o.source_only;
        self.sink_only += o.sink_only;
        self.inner_sinks += o.inner_sinks;
        self.unclassifiable += o.unclassifiable;
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScopeAnalysis {
    pub flows: Vec<RawFlow>,
    pub findings: Vec<Finding>,
    pub stats: ScopeStats,
}

/// Stable id over location and rule ids.
pub fn finding_id(path: &str, start_byte: usize, end_byte: usize, source_rules: &[&str], sink_rule: &str) -> String {
    let mut h = Sha256::new();
    h.update(path.as_bytes());
    h.update([0]);
    h.update(start_byte.to_string().as_bytes());
    h.update([0]);
    h.update(end_byte.to_string().as_bytes());
    h.update([0]);
    h.update(source_rules.join(",").as_bytes());
    h.update([0]);
    h.update(sink_rule.as_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn count_sinks(calls: &[CallExpr], pack: &RulePack) -> usize {
    calls
        .iter()
        .map(|c| usize::from(pack.match_sink(&c.callee).is_some()) + count_sinks(&c.nested, pack))
        .sum()
}

fn collect_sources(stmt: &Statement, call: &CallExpr, taint: &TaintSet, pack: &RulePack) -> Vec<Participant> {
    let mut out = Vec::new();
    if !call.receiver.is_empty() {
        if let Some(source) = category_of(&call.receiver, Role::Receiver, taint, pack) {
            out.push(Participant {
                position: Position::Receiver,
                source,
            });
        }
    }
    if let StatementKind::Assignment { target } = &stmt.kind {
        if let Some(source) = category_of(target, Role::Target, taint, pack) {
            out.push(Participant {
                position: Position::Target,
                source,
            });
        }
    }
    for (i, arg) in call.args.iter().enumerate() {
        for chain in &arg.idents {
            if let Some(source) = category_of(chain, Role::Arg, taint, pack) {
                out.push(Participant {
                    position: Position::Arg(i),
                    source,
                });
            }
        }
        for content in &arg.strings {
            for m in pack.match_literal(content) {
                out.push(Participant {
                    position: Position::LiteralArg(i),
                    source: SourceRef {
                        display: format!("\"{}\"", m.text),
                        matched: m.text.clone(),
                        stem: m.rule.stem.clone(),
                        categories: vec![m.rule.category],
                        rule_id: m.rule.id.clone(),
                        origin: SourceOrigin::Literal,
                        confidence: Confidence::Low,
                    },
                });
            }
        }
    }
    out
}

/// Analyses one scope's statements in source order.
pub fn analyze_scope(statements: &[Statement], pack: &RulePack, opts: AnalyzeOptions) -> ScopeAnalysis {
    let mut taint = TaintSet::default();
    let mut result = ScopeAnalysis::default();
    for stmt in statements {
        let Some(call) = &stmt.call else {
            if let StatementKind::Assignment { target } = &stmt.kind {
                if category_of(target, Role::Target, &taint, pack).is_some() {
                    result.stats.source_only += 1;
                }
            }
            continue;
        };
        if stmt.kind == StatementKind::Other {
            if pack.match_sink(&call.callee).is_some() {
                result.stats.unclassifiable += 1;
            }
            continue;
        }
        result.stats.inner_sinks += count_sinks(&call.nested, pack);
        let sources = collect_sources(stmt, call, &taint, pack);
        let sink = pack.match_sink(&call.callee);
        let sink = match (sources.is_empty(), sink) {
            (false, Some(rule)) => SinkRef {
                name: call.callee.clone(),
                text: call.callee_text.clone(),
                category: rule.category,
                rule_id: rule.id.clone(),
                certainty: rule.certainty,
            },
            (false, None) => {
                result.stats.source_only += 1;
                continue;
            }
            (true, Some(_)) => {
                result.stats.sink_only += 1;
                continue;
            }
            (true, None) => continue,
        };
        let flow = RawFlow {
            statement: stmt.clone(),
            sources,
            sink,
        };
        match classify(&flow) {
            Ok(instance) => {
                let primary = flow.primary().source.clone();
                let rule_ids: Vec<&str> = flow.sources.iter().map(|p| p.source.rule_id.as_str()).collect();
                let id = finding_id(
                    &stmt.file,
                    stmt.span.start_byte,
                    stmt.span.end_byte,
                    &rule_ids,
                    &flow.sink.rule_id,
                );
                let confidence = flow.confidence();
                if opts.propagation && instance.shape == FlowShape::P5 {
                    if let Some(name) = stmt.target().and_then(|t| t.last()) {
                        let mut categories: Vec<SourceCategory> =
                            flow.sources.iter().flat_map(|p| p.source.categories.iter().copied()).collect();
                        categories.sort();
                        categories.dedup();
                        taint.insert(TaintedVar {
                            name: name.clone(),
                            categories,
                            stem: primary.stem.clone(),
                            derived_from: id.clone(),
                            confidence,
                        });
                    }
                }
                result.findings.push(Finding {
                    id,
                    path: stmt.file.clone(),
                    span: stmt.span,
                    snippet: stmt.text.clone(),
                    scope_id: stmt.scope_id,
                    source: primary,
                    participants: flow.sources.clone(),
                    sink: flow.sink.clone(),
                    instance,
                    confidence,
                });
                result.flows.push(flow);
            }
            Err(_) => result.stats.unclassifiable += 1,
        }
    }
    result
}

#[derive(Debug, Clone, Default)]
pub struct FileAnalysis {
    pub statements: usize,
    pub findings: Vec<Finding>,
    pub stats: ScopeStats,
}

/// Extracts statements and analyses every scope of one file. Findings come
/// back in source order.
pub fn analyze_file(file: &SourceFile, pack: &RulePack, opts: AnalyzeOptions) -> FileAnalysis {
    let statements = extract_statements(file);
    let mut scopes: BTreeMap<u32, Vec<Statement>> = BTreeMap::new();
    for stmt in &statements {
        scopes.entry(stmt.scope_id).or_default().push(stmt.clone());
    }
    let mut out = FileAnalysis {
        statements: statements.len(),
        ..FileAnalysis::default()
    };
    for stmts in scopes.values() {
        let scope = analyze_scope(stmts, pack, opts);
        out.findings.extend(scope.findings);
        out.stats += scope.stats;
    }
    out.findings
        .sort_by(|a, b| (a.span.start_byte, a.span.end_byte).cmp(&(b.span.start_byte, b.span.end_byte)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stmt::Language;

    fn pack() -> RulePack {
        RulePack::default_pack()
    }

    fn analyze(src: &str, opts: AnalyzeOptions) -> FileAnalysis {
        analyze_file(&SourceFile::new("t.js", Language::JavaScript, src), &pack(), opts)
    }

    fn chain(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn category_of_final_segment() {
        let s = category_of(&chain(&["users", "email_addr"]), Role::Arg, &TaintSet::default(), &pack()).unwrap();
        assert_eq!(s.categories, [SourceCategory::Contact]);
        assert_eq!(s.matched, "email_addr");
        assert_eq!(s.display, "users.email_addr");
        assert_eq!(s.confidence, Confidence::High);
    }

    #[test]
    fn category_of_intermediate_segment() {
        let s = category_of(&chain(&["user", "id"]), Role::Arg, &TaintSet::default(), &pack()).unwrap();
        assert_eq!(s.categories, [SourceCategory::Account]);
        assert_eq!(s.matched, "user.id");
        assert!(category_of(&chain(&["user", "id"]), Role::Receiver, &TaintSet::default(), &pack()).is_none());
    }

    #[test]
    fn category_of_unknown() {
        assert!(category_of(&chain(&["tmp"]), Role::Arg, &TaintSet::default(), &pack()).is_none());
    }

    #[test]
    fn propagation_through_solid_flow() {
        let r = analyze("choice = UserInfo.retrieve(2);\nsend(choice);", AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 2);
        let second = &r.findings[1];
        assert_eq!(second.instance.rendered, "choice -send-> send(choice)");
        assert_eq!(
            second.source.origin,
            SourceOrigin::Derived {
                from: r.findings[0].id.clone()
            }
        );
        assert_eq!(second.source.categories, [SourceCategory::Account]);

        let r = analyze(
            "choice = UserInfo.retrieve(2);\nsend(choice);",
            AnalyzeOptions { propagation: false },
        );
        assert_eq!(r.findings.len(), 1);
    }

    #[test]
    fn dashed_flow_does_not_propagate() {
        let r = analyze("ok = validate(email);\nsend(ok);", AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].instance.rendered, "email ~validate~> ok");
    }

    #[test]
    fn propagation_is_scope_local() {
        let src = "function a() { choice = UserInfo.retrieve(2); }\nfunction b() { send(choice); }";
        let r = analyze(src, AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 1);
    }

    #[test]
    fn sink_without_source_is_dropped() {
        let r = analyze("counter = count(items);\nlog(counter);", AnalyzeOptions::default());
        assert!(r.findings.is_empty());
        assert_eq!(r.stats.sink_only, 1);
    }

    #[test]
    fn literal_sources_are_low_confidence() {
        let r = analyze("send('contact noreply@test.org')", AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 1);
        let f = &r.findings[0];
        assert_eq!(f.confidence, Confidence::Low);
        assert_eq!(f.source.origin, SourceOrigin::Literal);
        assert_eq!(f.instance.rendered, "\"noreply@test.org\" -send-> send(\"noreply@test.org\")");
    }

    #[test]
    fn print_ssn() {
        let r = analyze("print(SSN)", AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].participants[0].position, Position::Arg(0));
        assert_eq!(r.findings[0].sink.category, crate::rulepack::SinkCategory::Log);
    }

    #[test]
    fn no_sources_no_flows() {
        let p = pack().without_sources();
        let f = SourceFile::new("t.js", Language::JavaScript, "print(SSN);\nsend(email);");
        assert!(analyze_file(&f, &p, AnalyzeOptions::default()).findings.is_empty());
    }

    #[test]
    fn inner_sinks_are_counted() {
        let r = analyze("send(format(email))", AnalyzeOptions::default());
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].sink.name, "send");
        assert_eq!(r.stats.inner_sinks, 1);
    }

    #[test]
    fn destructuring_with_sink_is_unclassifiable() {
        let r = analyze("const { a } = send(email);", AnalyzeOptions::default());
        assert!(r.findings.is_empty());
        assert_eq!(r.stats.unclassifiable, 1);
    }

    #[test]
    fn finding_ids_are_stable() {
        let a = finding_id("a.js", 0, 10, &["con.email"], "t.send");
        assert_eq!(a, finding_id("a.js", 0, 10, &["con.email"], "t.send"));
        assert_ne!(a, finding_id("a.js", 0, 11, &["con.email"], "t.send"));
        assert_eq!(a.len(), 16);
    }
}
