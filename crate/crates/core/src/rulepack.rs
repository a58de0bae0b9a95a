//! Identification rules for personal-data sources and processing sinks.
//!
//! A [`RulePack`] is loaded from a YAML mapping (see `docs/rulepack.md`),
//! validated, compiled once, and then shared read-only by every scanner
//! worker. The embedded default pack covers all ten source categories and
//! all six sink categories.
//!
//! Identifier matching is token aligned: a pattern must start and end on a
//! token boundary of the identifier, where boundaries are the identifier
//! ends, `_`/`-`/`$` separators, camelCase humps and letter/digit switches.
//! This is what keeps the `log` verb from matching `login`.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

const DEFAULT_PACK: &str = include_str!("default_rules.yaml");

/// Start-of-token assertion. Evaluated case-sensitively even inside `(?i)`.
const TOKEN_START: &str = r"(?-i:^|(?<=[^A-Za-z0-9])|(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])|(?<=[A-Za-z])(?=[0-9])|(?<=[0-9])(?=[A-Za-z]))";
const TOKEN_END: &str = r"(?-i:$|(?=[^A-Za-z0-9])|(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])|(?<=[A-Za-z])(?=[0-9])|(?<=[0-9])(?=[A-Za-z]))";

#[derive(Debug, thiserror::Error)]
pub enum RulePackError {
    #[error("cannot read rule pack {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed rule pack: {0}")]
    Parse(String),
    #[error("rule `{id}`: invalid pattern `{pattern}`: {message}")]
    InvalidRegex {
        id: String,
        pattern: String,
        message: String,
    },
    #[error("duplicate rule id `{0}`")]
    DuplicateRuleId(String),
    #[error("rule `{id}`: {reason}")]
    InvalidRule { id: String, reason: String },
}

/// Personal-data categories with their three-letter abbreviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceCategory {
    Account,
    Contact,
    PersonalId,
    OnlineIdentifier,
    Location,
    Feedback,
    Health,
    NationalId,
    Technical,
    Financial,
}

impl SourceCategory {
    pub const ALL: [SourceCategory; 10] = [
        SourceCategory::Account,
        SourceCategory::Contact,
        SourceCategory::PersonalId,
        SourceCategory::OnlineIdentifier,
        SourceCategory::Location,
        SourceCategory::Feedback,
        SourceCategory::Health,
        SourceCategory::NationalId,
        SourceCategory::Technical,
        SourceCategory::Financial,
    ];

    pub fn abbreviation(self) -> &'static str {
        match self {
            SourceCategory::Account => "ACC",
            SourceCategory::Contact => "CON",
            SourceCategory::PersonalId => "PID",
            SourceCategory::OnlineIdentifier => "OID",
            SourceCategory::Location => "LOC",
            SourceCategory::Feedback => "FEE",
            SourceCategory::Health => "HEA",
            SourceCategory::NationalId => "NID",
            SourceCategory::Technical => "TEC",
            SourceCategory::Financial => "FIN",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SourceCategory::Account => "Account",
            SourceCategory::Contact => "Contact",
            SourceCategory::PersonalId => "Personal ID",
            SourceCategory::OnlineIdentifier => "Online identifier",
            SourceCategory::Location => "Location",
            SourceCategory::Feedback => "Feedback",
            SourceCategory::Health => "Health",
            SourceCategory::NationalId => "National ID",
            SourceCategory::Technical => "Technical",
            SourceCategory::Financial => "Financial",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

impl FromStr for SourceCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        SourceCategory::ALL
            .into_iter()
            .find(|c| c.abbreviation() == upper)
            .ok_or_else(|| format!("unknown source category `{s}`"))
    }
}

/// Processing categories. `Database` is written `DB` everywhere; `D` is
/// accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SinkCategory {
    Manipulation,
    Transportation,
    CreationDeletion,
    Database,
    Encryption,
    Log,
}

impl SinkCategory {
    pub const ALL: [SinkCategory; 6] = [
        SinkCategory::Manipulation,
        SinkCategory::Transportation,
        SinkCategory::CreationDeletion,
        SinkCategory::Database,
        SinkCategory::Encryption,
        SinkCategory::Log,
    ];

    pub fn abbreviation(self) -> &'static str {
        match self {
            SinkCategory::Manipulation => "M",
            SinkCategory::Transportation => "T",
            SinkCategory::CreationDeletion => "C/D",
            SinkCategory::Database => "DB",
            SinkCategory::Encryption => "E",
            SinkCategory::Log => "L",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SinkCategory::Manipulation => "Manipulation",
            SinkCategory::Transportation => "Transportation",
            SinkCategory::CreationDeletion => "Creation/Deletion",
            SinkCategory::Database => "Database",
            SinkCategory::Encryption => "Encryption",
            SinkCategory::Log => "Log",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SinkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

impl FromStr for SinkCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        if upper == "D" {
            return Ok(SinkCategory::Database);
        }
        SinkCategory::ALL
            .into_iter()
            .find(|c| c.abbreviation() == upper)
            .ok_or_else(|| format!("unknown sink category `{s}`"))
    }
}

macro_rules! serde_via_str {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.abbreviation())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(SourceCategory);
serde_via_str!(SinkCategory);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Matches variable, field and parameter names.
    Variable,
    /// Matches inside the content of string literals.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certainty {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SinkOrigin {
    DpvVerb,
    ApiMethod { provider: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRule {
    pub id: String,
    pub category: SourceCategory,
    pub stem: String,
    pub kind: RuleKind,
    pub patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkRule {
    pub id: String,
    pub category: SinkCategory,
    pub pattern: String,
    pub certainty: Certainty,
    pub origin: SinkOrigin,
}

// On-disk representation.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    #[serde(default)]
    version: Option<String>,
    #[serde(default)]
    replace: bool,
    #[serde(default)]
    sources: Vec<SourceRuleDef>,
    #[serde(default)]
    sinks: Vec<SinkRuleDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceRuleDef {
    id: String,
    category: SourceCategory,
    stem: String,
    #[serde(default = "default_kind")]
    kind: RuleKind,
    patterns: Vec<String>,
}

fn default_kind() -> RuleKind {
    RuleKind::Variable
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SinkRuleDef {
    id: String,
    category: SinkCategory,
    pattern: String,
    #[serde(default = "default_certainty")]
    certainty: Certainty,
    #[serde(default = "default_origin")]
    origin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provider: Option<String>,
}

fn default_certainty() -> Certainty {
    Certainty::Solid
}

fn default_origin() -> String {
    "dpv".to_string()
}

impl From<&SourceRule> for SourceRuleDef {
    fn from(rule: &SourceRule) -> Self {
        SourceRuleDef {
            id: rule.id.clone(),
            category: rule.category,
            stem: rule.stem.clone(),
            kind: rule.kind,
            patterns: rule.patterns.clone(),
        }
    }
}

impl From<&SinkRule> for SinkRuleDef {
    fn from(rule: &SinkRule) -> Self {
        let (origin, provider) = match &rule.origin {
            SinkOrigin::DpvVerb => ("dpv".to_string(), None),
            SinkOrigin::ApiMethod { provider } => ("api".to_string(), Some(provider.clone())),
        };
        SinkRuleDef {
            id: rule.id.clone(),
            category: rule.category,
            pattern: rule.pattern.clone(),
            certainty: rule.certainty,
            origin,
            provider,
        }
    }
}

impl SourceRuleDef {
    fn into_rule(self) -> Result<SourceRule, RulePackError> {
        if self.id.trim().is_empty() {
            return Err(RulePackError::Parse("source rule with empty id".into()));
        }
        if self.patterns.is_empty() {
            return Err(RulePackError::InvalidRule {
                id: self.id,
                reason: "at least one pattern is required".into(),
            });
        }
        if self.stem.is_empty()
            || !self
                .stem
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        {
            return Err(RulePackError::InvalidRule {
                id: self.id,
                reason: format!(
                    "stem `{}` must be lowercase letters/digits without separators",
                    self.stem
                ),
            });
        }
        Ok(SourceRule {
            id: self.id,
            category: self.category,
            stem: self.stem,
            kind: self.kind,
            patterns: self.patterns,
        })
    }
}

impl SinkRuleDef {
    fn into_rule(self) -> Result<SinkRule, RulePackError> {
        if self.id.trim().is_empty() {
            return Err(RulePackError::Parse("sink rule with empty id".into()));
        }
        let origin = match self.origin.to_ascii_lowercase().as_str() {
            "dpv" | "verb" => SinkOrigin::DpvVerb,
            "api" => SinkOrigin::ApiMethod {
                provider: self.provider.unwrap_or_else(|| "unknown".to_string()),
            },
            other => {
                return Err(RulePackError::InvalidRule {
                    id: self.id,
                    reason: format!("unknown origin `{other}` (expected `dpv` or `api`)"),
                })
            }
        };
        Ok(SinkRule {
            id: self.id,
            category: self.category,
            pattern: self.pattern,
            certainty: self.certainty,
            origin,
        })
    }
}

#[derive(Debug, Clone)]
struct CompiledSource {
    rule: SourceRule,
    regexes: Vec<Regex>,
}

#[derive(Debug, Clone)]
struct CompiledSink {
    rule: SinkRule,
    regex: Regex,
}

/// A validated, compiled rule pack. Immutable after construction.
#[derive(Debug, Clone)]
pub struct RulePack {
    version: String,
    sources: Vec<CompiledSource>,
    sinks: Vec<CompiledSink>,
}

#[derive(Debug, Clone, Copy)]
pub struct SourceMatch<'a> {
    pub rule: &'a SourceRule,
    pub stem: &'a str,
}

#[derive(Debug, Clone)]
pub struct LiteralMatch<'a> {
    pub rule: &'a SourceRule,
    /// Byte range inside the literal content.
    pub span: Range<usize>,
    pub text: String,
}

fn compile_token_aligned(id: &str, pattern: &str) -> Result<Regex, RulePackError> {
    // Validate the user pattern on its own first so the error points at it.
    Regex::new(pattern).map_err(|e| RulePackError::InvalidRegex {
        id: id.to_string(),
        pattern: pattern.to_string(),
        message: e.to_string(),
    })?;
    let wrapped = format!("(?i){TOKEN_START}(?:{pattern}){TOKEN_END}");
    Regex::new(&wrapped).map_err(|e| RulePackError::InvalidRegex {
        id: id.to_string(),
        pattern: pattern.to_string(),
        message: e.to_string(),
    })
}

fn compile_plain(id: &str, pattern: &str) -> Result<Regex, RulePackError> {
    Regex::new(pattern).map_err(|e| RulePackError::InvalidRegex {
        id: id.to_string(),
        pattern: pattern.to_string(),
        message: e.to_string(),
    })
}

fn compile_source(rule: SourceRule) -> Result<CompiledSource, RulePackError> {
    let regexes = rule
        .patterns
        .iter()
        .map(|p| match rule.kind {
            RuleKind::Variable => compile_token_aligned(&rule.id, p),
            RuleKind::Literal => compile_plain(&rule.id, p),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompiledSource { rule, regexes })
}

fn compile_sink(rule: SinkRule) -> Result<CompiledSink, RulePackError> {
    let regex = compile_token_aligned(&rule.id, &rule.pattern)?;
    Ok(CompiledSink { rule, regex })
}

fn is_match(regex: &Regex, text: &str) -> bool {
    // A backtrack-limit error counts as no match.
    regex.is_match(text).unwrap_or(false)
}

impl RulePack {
    /// The embedded default pack.
    pub fn default_pack() -> RulePack {
        static CACHE: OnceLock<RulePack> = OnceLock::new();
        CACHE
            .get_or_init(|| RulePack::from_yaml_str(DEFAULT_PACK).expect("embedded default rule pack is valid"))
            .clone()
    }

    /// Loads `"default"` or a YAML file merged over the default pack.
    pub fn load(path: &str) -> Result<RulePack, RulePackError> {
        if path == "default" {
            return Ok(RulePack::default_pack());
        }
        let text = std::fs::read_to_string(Path::new(path)).map_err(|e| RulePackError::Io {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        RulePack::default_pack().merged_with_yaml(&text)
    }

    /// Parses a standalone pack (no merge with the default).
    pub fn from_yaml_str(text: &str) -> Result<RulePack, RulePackError> {
        let file = parse_file(text)?;
        build(
            file.version.unwrap_or_else(|| "0".to_string()),
            file.sources,
            file.sinks,
        )
    }

    /// Applies a user rule file on top of this pack: same ids override in
    /// place, new ids append, and `replace: true` discards this pack.
    pub fn merged_with_yaml(&self, text: &str) -> Result<RulePack, RulePackError> {
        let file = parse_file(text)?;
        check_unique(
            file.sources
                .iter()
                .map(|r| r.id.as_str())
                .chain(file.sinks.iter().map(|r| r.id.as_str())),
        )?;
        if file.replace {
            return build(
                file.version.unwrap_or_else(|| "0".to_string()),
                file.sources,
                file.sinks,
            );
        }
        let mut sources: Vec<SourceRuleDef> = self.sources.iter().map(|c| (&c.rule).into()).collect();
        let mut sinks: Vec<SinkRuleDef> = self.sinks.iter().map(|c| (&c.rule).into()).collect();
        for def in file.sources {
            if sinks.iter().any(|s| s.id == def.id) {
                return Err(RulePackError::DuplicateRuleId(def.id));
            }
            match sources.iter_mut().find(|s| s.id == def.id) {
                Some(slot) => *slot = def,
                None => sources.push(def),
            }
        }
        for def in file.sinks {
            if sources.iter().any(|s| s.id == def.id) {
                return Err(RulePackError::DuplicateRuleId(def.id));
            }
            match sinks.iter_mut().find(|s| s.id == def.id) {
                Some(slot) => *slot = def,
                None => sinks.push(def),
            }
        }
        let version = match file.version {
            Some(v) if v != self.version => format!("{}+{}", self.version, v),
            _ => self.version.clone(),
        };
        build(version, sources, sinks)
    }

    /// Merges another compiled pack over this one with the same rules as
    /// [`RulePack::merged_with_yaml`].
    pub fn merged_with(&self, other: &RulePack) -> Result<RulePack, RulePackError> {
        self.merged_with_yaml(&other.to_yaml())
    }

    /// Serializes the pack back to the rule-file format.
    pub fn to_yaml(&self) -> String {
        let file = RuleFile {
            version: Some(self.version.clone()),
            replace: false,
            sources: self.sources.iter().map(|c| (&c.rule).into()).collect(),
            sinks: self.sinks.iter().map(|c| (&c.rule).into()).collect(),
        };
        serde_yaml::to_string(&file).expect("rule file serializes")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn sources(&self) -> impl Iterator<Item = &SourceRule> {
        self.sources.iter().map(|c| &c.rule)
    }

    pub fn sinks(&self) -> impl Iterator<Item = &SinkRule> {
        self.sinks.iter().map(|c| &c.rule)
    }

    pub fn source_rule(&self, id: &str) -> Option<&SourceRule> {
        self.sources().find(|r| r.id == id)
    }

    pub fn sink_rule(&self, id: &str) -> Option<&SinkRule> {
        self.sinks().find(|r| r.id == id)
    }

    /// A copy of this pack with every source rule removed.
    pub fn without_sources(&self) -> RulePack {
        RulePack {
            version: self.version.clone(),
            sources: Vec::new(),
            sinks: self.sinks.clone(),
        }
    }

    /// First variable-name rule (pack order) matching `identifier`.
    pub fn match_source(&self, identifier: &str) -> Option<SourceMatch<'_>> {
        if identifier.is_empty() {
            return None;
        }
        self.sources
            .iter()
            .filter(|c| c.rule.kind == RuleKind::Variable)
            .find(|c| c.regexes.iter().any(|re| is_match(re, identifier)))
            .map(|c| SourceMatch {
                rule: &c.rule,
                stem: &c.rule.stem,
            })
    }

    /// All literal-value matches inside one string literal's content.
    pub fn match_literal(&self, text: &str) -> Vec<LiteralMatch<'_>> {
        let mut out = Vec::new();
        if text.is_empty() {
            return out;
        }
        for compiled in self.sources.iter().filter(|c| c.rule.kind == RuleKind::Literal) {
            for re in &compiled.regexes {
                for m in re.find_iter(text).flatten() {
                    if m.start() == m.end() {
                        continue;
                    }
                    out.push(LiteralMatch {
                        rule: &compiled.rule,
                        span: m.start()..m.end(),
                        text: m.as_str().to_string(),
                    });
                }
            }
        }
        out.sort_by_key(|m| (m.span.start, m.span.end));
        out
    }

    /// First sink rule (pack order) whose pattern matches a whole token run
    /// of `callee`.
    pub fn match_sink(&self, callee: &str) -> Option<&SinkRule> {
        if callee.is_empty() {
            return None;
        }
        self.sinks
            .iter()
            .find(|c| is_match(&c.regex, callee))
            .map(|c| &c.rule)
    }
}

fn parse_file(text: &str) -> Result<RuleFile, RulePackError> {
    if text.trim().is_empty() {
        return Ok(RuleFile::default());
    }
    serde_yaml::from_str(text).map_err(|e| RulePackError::Parse(e.to_string()))
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), RulePackError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(RulePackError::DuplicateRuleId(id.to_string()));
        }
    }
    Ok(())
}

fn build(
    version: String,
    sources: Vec<SourceRuleDef>,
    sinks: Vec<SinkRuleDef>,
) -> Result<RulePack, RulePackError> {
    check_unique(
        sources
            .iter()
            .map(|r| r.id.as_str())
            .chain(sinks.iter().map(|r| r.id.as_str())),
    )?;
    let sources = sources
        .into_iter()
        .map(|d| d.into_rule().and_then(compile_source))
        .collect::<Result<Vec<_>, _>>()?;
    let sinks = sinks
        .into_iter()
        .map(|d| d.into_rule().and_then(compile_sink))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RulePack {
        version,
        sources,
        sinks,
    })
}
