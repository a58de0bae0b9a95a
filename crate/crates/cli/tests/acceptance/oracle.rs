//! Brute-force reference for classification: works from the generator's own
//! statement structure, enumerates every rule match by trying each
//! token-aligned span of an identifier, and applies the decision table from
//! scratch.

use std::collections::{BTreeSet, HashMap};

use fancy_regex::Regex;
use pdflow_core::patterns::{Finding, Position, SourceOrigin};
use pdflow_core::rulepack::{Certainty, RuleKind, RulePack};

#[derive(Debug, Clone)]
pub enum GenArg {
    Ident(Vec<String>),
    Str(String),
    Num(u32),
}

#[derive(Debug, Clone)]
pub enum GenKind {
    /// `target = recv.callee(args)` or a bare call.
    Call { target: Option<Vec<String>> },
    /// `const { a, b } = recv.callee(args)`: not classifiable.
    Destructure,
}

#[derive(Debug, Clone)]
pub struct GenStmt {
    pub kind: GenKind,
    pub receiver: Vec<String>,
    pub callee: String,
    pub args: Vec<GenArg>,
}

/// One expected finding, in a shape that can be compared with a real one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expect {
    pub line: usize,
    pub shape: String,
    pub rendered: String,
    pub primary: (String, String, Vec<String>, String, &'static str),
    pub sink: (String, String),
    pub low_confidence: bool,
    pub participants: Vec<(String, String)>,
}

fn origin_name(o: &SourceOrigin) -> &'static str {
    match o {
        SourceOrigin::Seeded => "seeded",
        SourceOrigin::Literal => "literal",
        SourceOrigin::Derived { .. } => "derived",
    }
}

fn position_name(p: &Position) -> String {
    match p {
        Position::Target => "target".into(),
        Position::Receiver => "receiver".into(),
        Position::Arg(i) => format!("arg{i}"),
        Position::LiteralArg(i) => format!("lit{i}"),
    }
}

pub fn observed(f: &Finding) -> Expect {
    Expect {
        line: f.span.start_line,
        shape: f.instance.shape.name().to_string(),
        rendered: f.instance.rendered.clone(),
        primary: (
            f.source.display.clone(),
            f.source.rule_id.clone(),
            f.source.categories.iter().map(|c| c.abbreviation().to_string()).collect(),
            f.source.stem.clone(),
            origin_name(&f.source.origin),
        ),
        sink: (f.sink.rule_id.clone(), f.sink.category.abbreviation().to_string()),
        low_confidence: f.confidence == pdflow_core::patterns::Confidence::Low,
        participants: f
            .participants
            .iter()
            .map(|p| (position_name(&p.position), p.source.rule_id.clone()))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Class {
    Lower,
    Upper,
    Digit,
    Other,
}

fn class(b: u8) -> Class {
    match b {
        b'a'..=b'z' => Class::Lower,
        b'A'..=b'Z' => Class::Upper,
        b'0'..=b'9' => Class::Digit,
        _ => Class::Other,
    }
}

/// Positions where a word may start and end: identifier edges,
/// separators, camelCase humps and letter/digit switches.
fn boundaries(s: &str) -> (Vec<usize>, Vec<usize>) {
    let b = s.as_bytes();
    let n = b.len();
    let at = |i: usize| if i < n { class(b[i]) } else { Class::Other };
    let letter = |c: Class| matches!(c, Class::Lower | Class::Upper);
    let hump = |p: usize| {
        if p == 0 || p >= n {
            return false;
        }
        let (prev, cur) = (at(p - 1), at(p));
        (matches!(prev, Class::Lower | Class::Digit) && cur == Class::Upper)
            || (prev == Class::Upper && cur == Class::Upper && p + 1 < n && at(p + 1) == Class::Lower)
            || (letter(prev) && cur == Class::Digit)
            || (prev == Class::Digit && letter(cur))
    };
    let starts = (0..=n).filter(|&p| p == 0 || at(p - 1) == Class::Other || hump(p)).collect();
    let ends = (0..=n).filter(|&p| p == n || at(p) == Class::Other || hump(p)).collect();
    (starts, ends)
}

pub struct Oracle {
    pack: RulePack,
    /// (pattern, prefix length, suffix length) -> anchored regex.
    anchored: HashMap<(String, usize, usize), Regex>,
    plain: HashMap<String, Regex>,
    source_memo: HashMap<String, Option<usize>>,
    sink_memo: HashMap<String, Option<usize>>,
}

struct Src {
    display: String,
    rule_id: String,
    categories: Vec<String>,
    stem: String,
    origin: &'static str,
    low: bool,
}

#[derive(Clone)]
struct Tainted {
    categories: Vec<String>,
    stem: String,
    low: bool,
}

impl Oracle {
    pub fn new(pack: RulePack) -> Oracle {
        Oracle {
            pack,
            anchored: HashMap::new(),
            plain: HashMap::new(),
            source_memo: HashMap::new(),
            sink_memo: HashMap::new(),
        }
    }

    /// Does `pattern` match exactly `text[s..e]`, with anchors inside the
    /// pattern still referring to the whole text?
    fn matches_span(&mut self, pattern: &str, text: &str, s: usize, e: usize) -> bool {
        let key = (pattern.to_string(), s, text.len() - e);
        let re = self.anchored.entry(key).or_insert_with(|| {
            Regex::new(&format!("(?i)^[\\s\\S]{{{s}}}(?:{pattern})(?=[\\s\\S]{{{}}}$)", text.len() - e)).unwrap()
        });
        re.is_match(text).unwrap()
    }

    fn word_match(&mut self, pattern: &str, text: &str) -> bool {
        let (starts, ends) = boundaries(text);
        for &s in &starts {
            for &e in ends.iter().filter(|&&e| e > s) {
                if self.matches_span(pattern, text, s, e) {
                    return true;
                }
            }
        }
        false
    }

    fn source_rule(&mut self, ident: &str) -> Option<usize> {
        if let Some(hit) = self.source_memo.get(ident) {
            return *hit;
        }
        let rules: Vec<(RuleKind, Vec<String>)> = self.pack.sources().map(|r| (r.kind, r.patterns.clone())).collect();
        let mut hit = None;
        'rules: for (i, (kind, patterns)) in rules.iter().enumerate() {
            if *kind != RuleKind::Variable {
                continue;
            }
            for p in patterns {
                if self.word_match(p, ident) {
                    hit = Some(i);
                    break 'rules;
                }
            }
        }
        self.source_memo.insert(ident.to_string(), hit);
        hit
    }

    fn sink_rule(&mut self, callee: &str) -> Option<usize> {
        if let Some(hit) = self.sink_memo.get(callee) {
            return *hit;
        }
        let patterns: Vec<String> = self.pack.sinks().map(|r| r.pattern.clone()).collect();
        let hit = (0..patterns.len()).find(|&i| self.word_match(&patterns[i], callee));
        self.sink_memo.insert(callee.to_string(), hit);
        hit
    }

    fn seeded(&mut self, chain: &[String], k: usize) -> Option<Src> {
        let i = self.source_rule(&chain[k])?;
        let rule = self.pack.sources().nth(i).unwrap();
        Some(Src {
            display: chain.join("."),
            rule_id: rule.id.clone(),
            categories: vec![rule.category.abbreviation().to_string()],
            stem: rule.stem.clone(),
            origin: "seeded",
            low: false,
        })
    }

    /// Receivers look only at their last segment; targets and arguments try
    /// the last segment, then earlier ones, for rules and then for taint.
    fn resolve(&mut self, chain: &[String], receiver: bool, taint: &HashMap<String, Tainted>) -> Option<Src> {
        let last = chain.len().checked_sub(1)?;
        let order: Vec<usize> = if receiver { vec![last] } else { (0..=last).rev().collect() };
        for &k in &order {
            if let Some(s) = self.seeded(chain, k) {
                return Some(s);
            }
        }
        for &k in &order {
            if let Some(t) = taint.get(&chain[k]) {
                return Some(Src {
                    display: chain.join("."),
                    rule_id: format!("derived:{}", chain[k]),
                    categories: t.categories.clone(),
                    stem: t.stem.clone(),
                    origin: "derived",
                    low: t.low,
                });
            }
        }
        None
    }

    fn literals(&mut self, content: &str) -> Vec<Src> {
        let mut found: Vec<(usize, usize, Src)> = Vec::new();
        let rules: Vec<_> = self.pack.sources().filter(|r| r.kind == RuleKind::Literal).cloned().collect();
        for rule in rules {
            for p in &rule.patterns {
                let re = self.plain.entry(p.clone()).or_insert_with(|| Regex::new(p).unwrap());
                for m in re.find_iter(content).flatten().filter(|m| m.start() < m.end()) {
                    found.push((
                        m.start(),
                        m.end(),
                        Src {
                            display: format!("\"{}\"", m.as_str()),
                            rule_id: rule.id.clone(),
                            categories: vec![rule.category.abbreviation().to_string()],
                            stem: rule.stem.clone(),
                            origin: "literal",
                            low: true,
                        },
                    ));
                }
            }
        }
        found.sort_by_key(|(s, e, _)| (*s, *e));
        found.into_iter().map(|(_, _, s)| s).collect()
    }

    /// Expected findings for one scope; `lines[i]` is statement i's line.
    pub fn scope(&mut self, stmts: &[GenStmt], lines: &[usize], propagation: bool) -> Vec<Expect> {
        let mut taint: HashMap<String, Tainted> = HashMap::new();
        let mut out = Vec::new();
        for (stmt, &line) in stmts.iter().zip(lines) {
            let target = match &stmt.kind {
                GenKind::Destructure => continue,
                GenKind::Call { target } => target.as_deref().map(normalized),
            };
            let receiver = normalized(&stmt.receiver);
            let Some(sink_idx) = self.sink_rule(&stmt.callee) else { continue };
            let sink = self.pack.sinks().nth(sink_idx).unwrap().clone();

            let recv = if receiver.is_empty() { None } else { self.resolve(&receiver, true, &taint) };
            let tgt = target.as_ref().and_then(|t| self.resolve(t, false, &taint));
            let mut args: Vec<(String, Src)> = Vec::new();
            for (i, a) in stmt.args.iter().enumerate() {
                match a {
                    GenArg::Ident(chain) => {
                        if let Some(s) = self.resolve(&normalized(chain), false, &taint) {
                            args.push((format!("arg{i}"), s));
                        }
                    }
                    GenArg::Str(content) => {
                        for s in self.literals(content) {
                            args.push((format!("lit{i}"), s));
                        }
                    }
                    GenArg::Num(_) => {}
                }
            }
            let (a, t, r, g) = (target.is_some(), tgt.is_some(), recv.is_some(), !args.is_empty());
            if !(t || r || g) {
                continue;
            }
            let solid = sink.certainty == Certainty::Solid;
            let tname = target.as_ref().map(|t| t.join(".")).unwrap_or_default();
            let rname = recv.as_ref().map(|s| s.display.clone()).unwrap_or_default();
            let anames: Vec<String> = args.iter().map(|(_, s)| s.display.clone()).collect();
            let m = &stmt.callee;
            let arrow = |lhs: String, rhs: String| {
                if solid {
                    format!("{lhs} -{m}-> {rhs}")
                } else {
                    format!("{lhs} ~{m}~> {rhs}")
                }
            };
            let plus = |parts: Vec<String>| parts.join("+");
            let (shape, rendered) = if a && t && !r && !g {
                ("P1", arrow("_".into(), tname.clone()))
            } else if a && t && !r && g {
                ("P2", arrow(plus([anames.clone(), vec!["_".into()]].concat()), tname.clone()))
            } else if a && t && r {
                ("P3", arrow(plus([vec![format!("{rname}(_)")], anames.clone()].concat()), tname.clone()))
            } else if a && !t {
                let mut lhs = Vec::new();
                if r {
                    lhs.push(rname.clone());
                }
                lhs.extend(anames.clone());
                (if solid { "P5" } else { "P4" }, arrow(plus(lhs), tname.clone()))
            } else if !a && r && g {
                ("P6", arrow(plus([vec![rname.clone()], anames.clone()].concat()), rname.clone()))
            } else if !a && r {
                ("P7", arrow(format!("{rname}+_"), rname.clone()))
            } else {
                ("P8", arrow(plus(anames.clone()), format!("{m}({})", anames.join(","))))
            };

            let mut parts: Vec<(String, &Src)> = Vec::new();
            if let Some(s) = &recv {
                parts.push(("receiver".into(), s));
            }
            if let Some(s) = &tgt {
                parts.push(("target".into(), s));
            }
            for (p, s) in &args {
                parts.push((p.clone(), s));
            }
            let primary = args
                .first()
                .map(|(_, s)| s)
                .or(recv.as_ref())
                .or(tgt.as_ref())
                .unwrap();
            let low = parts.iter().any(|(_, s)| s.low);
            if propagation && shape == "P5" {
                let name = target.as_ref().unwrap().last().unwrap().clone();
                let cats: BTreeSet<String> = parts.iter().flat_map(|(_, s)| s.categories.iter().cloned()).collect();
                let mut cats: Vec<String> = cats.into_iter().collect();
                // Category order follows the fixed category list, not the alphabet.
                cats.sort_by_key(|c| category_rank(c));
                taint.entry(name).or_insert(Tainted {
                    categories: cats,
                    stem: primary.stem.clone(),
                    low,
                });
            }
            out.push(Expect {
                line,
                shape: shape.to_string(),
                rendered,
                primary: (
                    primary.display.clone(),
                    primary.rule_id.clone(),
                    primary.categories.clone(),
                    primary.stem.clone(),
                    primary.origin,
                ),
                sink: (sink.id.clone(), sink.category.abbreviation().to_string()),
                low_confidence: low,
                participants: parts.iter().map(|(p, s)| (p.clone(), s.rule_id.clone())).collect(),
            });
        }
        out
    }
}

/// Identifier chains drop a leading `this`.
fn normalized(chain: &[String]) -> Vec<String> {
    match chain.split_first() {
        Some((head, rest)) if head == "this" && !rest.is_empty() => rest.to_vec(),
        _ => chain.to_vec(),
    }
}

fn category_rank(abbr: &str) -> usize {
    ["ACC", "CON", "PID", "OID", "LOC", "FEE", "HEA", "NID", "TEC", "FIN"]
        .iter()
        .position(|c| *c == abbr)
        .unwrap_or(usize::MAX)
}
