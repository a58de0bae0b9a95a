//! Reviewer views over a findings list: the personal data type tree, the
//! detailed flow table, the source x sink heatmap and the ROPA summary.
//!
//! Every builder is a pure function of its inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::patterns::{Confidence, Finding, FlowShape};
use crate::rulepack::{SinkCategory, SourceCategory};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("unknown key `{0}` (expected one of: stem, source-category, sink-category, sink, file, shape, confidence)")]
    UnknownKey(String),
    #[error("malformed filter `{0}` (expected key=value)")]
    MalformedFilter(String),
    #[error("invalid value `{value}` for {key}")]
    InvalidValue { key: String, value: String },
}

// ---------------------------------------------------------------------------
// Type tree

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantNode {
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StemNode {
    pub stem: String,
    pub count: usize,
    pub variants: Vec<VariantNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub category: SourceCategory,
    pub label: String,
    pub count: usize,
    pub stems: Vec<StemNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DataTypeTree {
    /// Number of findings (a finding with several categories counts once).
    pub total: usize,
    pub categories: Vec<CategoryNode>,
}

impl DataTypeTree {
    pub fn category(&self, category: SourceCategory) -> Option<&CategoryNode> {
        self.categories.iter().find(|c| c.category == category)
    }
}

/// Groups sources by category, then rule stem, then matched identifier.
/// A finding whose source carries several categories is listed under each.
pub fn build_type_view(findings: &[Finding]) -> DataTypeTree {
    let mut counts: BTreeMap<SourceCategory, BTreeMap<&str, BTreeMap<&str, usize>>> = BTreeMap::new();
    for f in findings {
        for &cat in &f.source.categories {
            *counts
                .entry(cat)
                .or_default()
                .entry(f.source.stem.as_str())
                .or_default()
                .entry(f.source.matched.as_str())
                .or_default() += 1;
        }
    }
    let mut categories: Vec<CategoryNode> = counts
        .into_iter()
        .map(|(category, stems)| {
            let mut stems: Vec<StemNode> = stems
                .into_iter()
                .map(|(stem, variants)| {
                    let mut variants: Vec<VariantNode> = variants
                        .into_iter()
                        .map(|(name, count)| VariantNode {
                            name: name.to_string(),
                            count,
                        })
                        .collect();
                    variants.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
                    StemNode {
                        stem: stem.to_string(),
                        count: variants.iter().map(|v| v.count).sum(),
                        variants,
                    }
                })
                .collect();
            stems.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.stem.cmp(&b.stem)));
            CategoryNode {
                category,
                label: category.label().to_string(),
                count: stems.iter().map(|s| s.count).sum(),
                stems,
            }
        })
        .collect();
    categories.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.category.abbreviation().cmp(b.category.abbreviation()))
    });
    DataTypeTree {
        total: findings.len(),
        categories,
    }
}

// ---------------------------------------------------------------------------
// Flow table

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKey {
    SourceStem,
    SourceCategory,
    SinkCategory,
    SinkName,
    File,
    PatternShape,
    Confidence,
    None,
}

impl TableKey {
    pub fn name(self) -> &'static str {
        match self {
            TableKey::SourceStem => "source-stem",
            TableKey::SourceCategory => "source-category",
            TableKey::SinkCategory => "sink-category",
            TableKey::SinkName => "sink-name",
            TableKey::File => "file",
            TableKey::PatternShape => "pattern-shape",
            TableKey::Confidence => "confidence",
            TableKey::None => "none",
        }
    }
}

impl FromStr for TableKey {
    type Err = ViewError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "stem" | "source-stem" | "source" => TableKey::SourceStem,
            "source-category" | "category" | "source-type" => TableKey::SourceCategory,
            "sink-category" | "sink-type" => TableKey::SinkCategory,
            "sink" | "sink-name" => TableKey::SinkName,
            "file" | "path" => TableKey::File,
            "shape" | "pattern-shape" | "pattern" => TableKey::PatternShape,
            "confidence" => TableKey::Confidence,
            "none" | "" => TableKey::None,
            _ => return Err(ViewError::UnknownKey(s.to_string())),
        })
    }
}

impl fmt::Display for TableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filter {
    pub key: TableKey,
    pub value: String,
}

impl FromStr for Filter {
    type Err = ViewError;

    /// Parses `key=value` or `key:value`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (key, value) = s
            .split_once('=')
            .or_else(|| s.split_once(':'))
            .ok_or_else(|| ViewError::MalformedFilter(s.to_string()))?;
        let key: TableKey = key.parse()?;
        if key == TableKey::None {
            return Err(ViewError::UnknownKey(key.to_string()));
        }
        let value = value.trim().to_string();
        let invalid = || ViewError::InvalidValue {
            key: key.to_string(),
            value: value.clone(),
        };
        match key {
            TableKey::SourceCategory => {
                SourceCategory::from_str(&value).map_err(|_| invalid())?;
            }
            TableKey::SinkCategory => {
                SinkCategory::from_str(&value).map_err(|_| invalid())?;
            }
            TableKey::PatternShape => {
                FlowShape::from_str(&value).map_err(|_| invalid())?;
            }
            TableKey::Confidence => {
                Confidence::from_str(&value).map_err(|_| invalid())?;
            }
            _ => {}
        }
        Ok(Filter { key, value })
    }
}

impl Filter {
    pub fn matches(&self, f: &Finding) -> bool {
        let v = self.value.as_str();
        match self.key {
            TableKey::SourceStem => f.source.stem.eq_ignore_ascii_case(v),
            TableKey::SourceCategory => SourceCategory::from_str(v)
                .map(|c| f.source.categories.contains(&c))
                .unwrap_or(false),
            TableKey::SinkCategory => SinkCategory::from_str(v)
                .map(|c| f.sink.category == c)
                .unwrap_or(false),
            TableKey::SinkName => f.sink.name == v || f.sink.text == v,
            TableKey::File => {
                let dir = v.trim_end_matches('/');
                f.path == v || (!dir.is_empty() && f.path.starts_with(&format!("{dir}/")))
            }
            TableKey::PatternShape => FlowShape::from_str(v)
                .map(|s| f.instance.shape == s)
                .unwrap_or(false),
            TableKey::Confidence => Confidence::from_str(v)
                .map(|c| f.confidence == c)
                .unwrap_or(false),
            TableKey::None => true,
        }
    }
}

/// Filters on the same key are alternatives; filters on different keys
/// must all hold.
pub fn matches_all(filters: &[Filter], f: &Finding) -> bool {
    let mut by_key: BTreeMap<TableKey, Vec<&Filter>> = BTreeMap::new();
    for filter in filters {
        by_key.entry(filter.key).or_default().push(filter);
    }
    by_key.values().all(|alts| alts.iter().any(|flt| flt.matches(f)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTableRow {
    pub path: String,
    pub source: String,
    pub sink: String,
    pub sink_type: String,
    pub flow_pattern_instance: String,
    pub id: String,
    pub confidence: Confidence,
    pub line: usize,
    pub stem: String,
    pub shape: FlowShape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowGroup {
    pub key: String,
    pub rows: Vec<FlowTableRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTable {
    pub group_by: TableKey,
    pub total: usize,
    pub groups: Vec<FlowGroup>,
}

impl FlowTable {
    pub fn rows(&self) -> impl Iterator<Item = &FlowTableRow> {
        self.groups.iter().flat_map(|g| g.rows.iter())
    }
}

fn joined_categories(cats: &[SourceCategory]) -> String {
    cats.iter().map(|c| c.abbreviation()).collect::<Vec<_>>().join("+")
}

/// Group value of a finding, plus a sort key that orders groups by enum
/// order where one exists.
fn group_value(key: TableKey, f: &Finding) -> (String, (usize, String)) {
    match key {
        TableKey::SourceStem => (f.source.stem.clone(), (0, f.source.stem.clone())),
        TableKey::SourceCategory => {
            let first = f.source.categories.first().map_or(0, |c| c.index());
            let label = joined_categories(&f.source.categories);
            (label.clone(), (first, label))
        }
        TableKey::SinkCategory => {
            let c = f.sink.category;
            (c.abbreviation().to_string(), (c.index(), String::new()))
        }
        TableKey::SinkName => (f.sink.name.clone(), (0, f.sink.name.clone())),
        TableKey::File => (f.path.clone(), (0, f.path.clone())),
        TableKey::PatternShape => {
            let s = f.instance.shape;
            (s.name().to_string(), (s as usize, String::new()))
        }
        TableKey::Confidence => {
            let c = f.confidence;
            (c.name().to_string(), (c as usize, String::new()))
        }
        TableKey::None => (String::new(), (0, String::new())),
    }
}

/// Filters, groups and ranks findings. Within a group, high-confidence rows
/// come first, then rows whose stem has more findings, then path and
/// position.
pub fn build_flow_table(findings: &[Finding], group_by: TableKey, filters: &[Filter]) -> FlowTable {
    let kept: Vec<&Finding> = findings.iter().filter(|f| matches_all(filters, f)).collect();
    let mut stem_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &kept {
        *stem_counts.entry(f.source.stem.as_str()).or_default() += 1;
    }
    let mut groups: BTreeMap<(usize, String), (String, Vec<&Finding>)> = BTreeMap::new();
    for f in &kept {
        let (label, order) = group_value(group_by, f);
        groups.entry(order).or_insert_with(|| (label, Vec::new())).1.push(f);
    }
    let groups = groups
        .into_values()
        .map(|(key, mut members)| {
            members.sort_by(|a, b| {
                a.confidence
                    .cmp(&b.confidence)
                    .then_with(|| stem_counts[b.source.stem.as_str()].cmp(&stem_counts[a.source.stem.as_str()]))
                    .then_with(|| a.path.cmp(&b.path))
                    .then_with(|| a.span.cmp(&b.span))
            });
            FlowGroup {
                key,
                rows: members.into_iter().map(row_of).collect(),
            }
        })
        .collect();
    FlowTable {
        group_by,
        total: kept.len(),
        groups,
    }
}

fn row_of(f: &Finding) -> FlowTableRow {
    FlowTableRow {
        path: f.path.clone(),
        source: f.source.display.clone(),
        sink: f.sink.text.clone(),
        sink_type: f.sink.category.abbreviation().to_string(),
        flow_pattern_instance: f.instance.rendered.clone(),
        id: f.id.clone(),
        confidence: f.confidence,
        line: f.span.start_line,
        stem: f.source.stem.clone(),
        shape: f.instance.shape,
    }
}

// ---------------------------------------------------------------------------
// Heatmap

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapStats {
    pub sources: Vec<SourceCategory>,
    pub sinks: Vec<SinkCategory>,
    /// `counts[source.index()][sink.index()]`
    pub counts: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub column_totals: Vec<usize>,
    pub total: usize,
}

impl HeatmapStats {
    pub fn get(&self, source: SourceCategory, sink: SinkCategory) -> usize {
        self.counts[source.index()][sink.index()]
    }
}

/// Counts findings per (source category, sink category). A finding whose
/// source has several categories increments each of them.
pub fn build_heatmap(findings: &[Finding]) -> HeatmapStats {
    let mut counts = vec![vec![0usize; SinkCategory::ALL.len()]; SourceCategory::ALL.len()];
    for f in findings {
        for c in &f.source.categories {
            counts[c.index()][f.sink.category.index()] += 1;
        }
    }
    let row_totals: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let column_totals: Vec<usize> = (0..SinkCategory::ALL.len())
        .map(|j| counts.iter().map(|r| r[j]).sum())
        .collect();
    HeatmapStats {
        sources: SourceCategory::ALL.to_vec(),
        sinks: SinkCategory::ALL.to_vec(),
        total: row_totals.iter().sum(),
        counts,
        row_totals,
        column_totals,
    }
}

// ---------------------------------------------------------------------------
// ROPA summary

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessingEntry {
    pub sink_category: SinkCategory,
    pub findings: usize,
    pub source_categories: Vec<SourceCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub source_category: SourceCategory,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferEntry {
    pub sink_category: SinkCategory,
    pub sources: Vec<CategoryCount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RopaSummary {
    pub categories_of_personal_data: Vec<SourceCategory>,
    pub categories_of_processing: Vec<ProcessingEntry>,
    pub database_or_third_party_transfers: Vec<TransferEntry>,
    pub encryption_or_anonymization: Vec<CategoryCount>,
    pub logging: Vec<CategoryCount>,
}

fn counts_for(findings: &[Finding], sink: SinkCategory) -> Vec<CategoryCount> {
    let mut counts: BTreeMap<SourceCategory, usize> = BTreeMap::new();
    for f in findings.iter().filter(|f| f.sink.category == sink) {
        for &c in &f.source.categories {
            *counts.entry(c).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(source_category, count)| CategoryCount { source_category, count })
        .collect()
}

pub fn build_ropa(findings: &[Finding]) -> RopaSummary {
    let personal: BTreeSet<SourceCategory> =
        findings.iter().flat_map(|f| f.source.categories.iter().copied()).collect();
    let categories_of_processing = SinkCategory::ALL
        .iter()
        .filter_map(|&sink| {
            let hits: Vec<&Finding> = findings.iter().filter(|f| f.sink.category == sink).collect();
            if hits.is_empty() {
                return None;
            }
            let sources: BTreeSet<SourceCategory> =
                hits.iter().flat_map(|f| f.source.categories.iter().copied()).collect();
            Some(ProcessingEntry {
                sink_category: sink,
                findings: hits.len(),
                source_categories: sources.into_iter().collect(),
            })
        })
        .collect();
    let transfers = [SinkCategory::Database, SinkCategory::Transportation]
        .into_iter()
        .filter_map(|sink| {
            let sources = counts_for(findings, sink);
            (!sources.is_empty()).then_some(TransferEntry {
                sink_category: sink,
                sources,
            })
        })
        .collect();
    RopaSummary {
        categories_of_personal_data: personal.into_iter().collect(),
        categories_of_processing,
        database_or_third_party_transfers: transfers,
        encryption_or_anonymization: counts_for(findings, SinkCategory::Encryption),
        logging: counts_for(findings, SinkCategory::Log),
    }
}

/// Categories found in code but missing from a declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub declared: Vec<SourceCategory>,
    pub missing: Vec<SourceCategory>,
}

impl Coverage {
    pub fn is_full(&self) -> bool {
        self.missing.is_empty()
    }
}

impl fmt::Display for Coverage {
    /// `+` for full coverage, otherwise `-ACC, -LOC`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return f.write_str("+");
        }
        let parts: Vec<String> = self.missing.iter().map(|c| format!("-{}", c.abbreviation())).collect();
        f.write_str(&parts.join(", "))
    }
}

pub fn coverage_diff(summary: &RopaSummary, declared: &BTreeSet<SourceCategory>) -> Coverage {
    Coverage {
        declared: declared.iter().copied().collect(),
        missing: summary
            .categories_of_personal_data
            .iter()
            .copied()
            .filter(|c| !declared.contains(c))
            .collect(),
    }
}

/// Parses a declared-categories file: a YAML/JSON list of abbreviations, a
/// mapping with a `categories` or `declared` list, or bare abbreviations
/// separated by commas, spaces or newlines (`#` starts a comment).
pub fn parse_declared(text: &str) -> Result<BTreeSet<SourceCategory>, ViewError> {
    let words: Vec<String> = match serde_yaml::from_str::<serde_yaml::Value>(text) {
        Ok(serde_yaml::Value::Sequence(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string).unwrap_or_default())
            .collect(),
        Ok(serde_yaml::Value::Mapping(map)) => {
            let list = map
                .get("categories")
                .or_else(|| map.get("declared"))
                .and_then(|v| v.as_sequence())
                .ok_or_else(|| ViewError::UnknownKey("expected `categories` list".to_string()))?;
            list.iter()
                .map(|v| v.as_str().map(str::to_string).unwrap_or_default())
                .collect()
        }
        _ => text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect(),
    };
    words
        .iter()
        .map(|w| {
            SourceCategory::from_str(w.trim()).map_err(|_| ViewError::InvalidValue {
                key: "declared category".to_string(),
                value: w.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::finding;

    #[test]
    fn type_view_groups_variants_under_stem() {
        let fs = vec![
            finding("a.ts", 0, "email_addr", "email", &[SourceCategory::Contact], SinkCategory::Database),
            finding("a.ts", 10, "email_addr", "email", &[SourceCategory::Contact], SinkCategory::Database),
            finding("a.ts", 20, "email", "email", &[SourceCategory::Contact], SinkCategory::Log),
        ];
        let tree = build_type_view(&fs);
        assert_eq!(tree.categories.len(), 1);
        let con = &tree.categories[0];
        assert_eq!(con.count, 3);
        assert_eq!(con.stems[0].stem, "email");
        let variants: Vec<(&str, usize)> =
            con.stems[0].variants.iter().map(|v| (v.name.as_str(), v.count)).collect();
        assert_eq!(variants, [("email_addr", 2), ("email", 1)]);
        assert_eq!(build_type_view(&[]), DataTypeTree::default());
    }

    #[test]
    fn filters_parse_with_aliases() {
        let f: Filter = "stem=email".parse().unwrap();
        assert_eq!(f.key, TableKey::SourceStem);
        let f: Filter = "sink-type:DB".parse().unwrap();
        assert_eq!(f.key, TableKey::SinkCategory);
        assert!(matches!("colour=red".parse::<Filter>(), Err(ViewError::UnknownKey(_))));
        assert!(matches!("shape=P9".parse::<Filter>(), Err(ViewError::InvalidValue { .. })));
        assert!(matches!("nokey".parse::<Filter>(), Err(ViewError::MalformedFilter(_))));
    }

    #[test]
    fn flow_table_filters_and_partitions() {
        let fs = vec![
            finding("b.ts", 0, "email", "email", &[SourceCategory::Contact], SinkCategory::Database),
            finding("a.ts", 5, "ssn", "ssn", &[SourceCategory::NationalId], SinkCategory::Log),
            finding("a.ts", 0, "email", "email", &[SourceCategory::Contact], SinkCategory::Transportation),
        ];
        let all = build_flow_table(&fs, TableKey::None, &[]);
        assert_eq!(all.total, 3);
        assert_eq!(all.groups.len(), 1);
        let email = build_flow_table(&fs, TableKey::None, &["stem=email".parse().unwrap()]);
        let paths: Vec<&str> = email.rows().map(|r| r.path.as_str()).collect();
        assert_eq!(paths, ["a.ts", "b.ts"]);
        let by_sink = build_flow_table(&fs, TableKey::SinkCategory, &[]);
        let keys: Vec<&str> = by_sink.groups.iter().map(|g| g.key.as_str()).collect();
        assert_eq!(keys, ["T", "DB", "L"]);
        assert_eq!(by_sink.rows().count(), 3);
        let none = build_flow_table(&fs, TableKey::None, &["sink-category=E".parse().unwrap()]);
        assert_eq!(none.total, 0);
    }

    #[test]
    fn heatmap_single_cell() {
        let fs = vec![finding("a", 0, "email", "email", &[SourceCategory::Contact], SinkCategory::Database)];
        let h = build_heatmap(&fs);
        assert_eq!(h.get(SourceCategory::Contact, SinkCategory::Database), 1);
        assert_eq!(h.total, 1);
        assert_eq!(h.counts.iter().flatten().sum::<usize>(), 1);
    }

    #[test]
    fn ropa_aggregation() {
        let fs = vec![
            finding("a", 0, "account", "account", &[SourceCategory::Account], SinkCategory::Database),
            finding("a", 1, "email", "email", &[SourceCategory::Contact], SinkCategory::Encryption),
            finding("a", 2, "email", "email", &[SourceCategory::Contact], SinkCategory::Log),
        ];
        let r = build_ropa(&fs);
        assert_eq!(
            r.categories_of_personal_data,
            [SourceCategory::Account, SourceCategory::Contact]
        );
        assert_eq!(r.database_or_third_party_transfers.len(), 1);
        assert_eq!(r.database_or_third_party_transfers[0].sink_category, SinkCategory::Database);
        assert_eq!(r.database_or_third_party_transfers[0].sources[0].source_category, SourceCategory::Account);
        assert_eq!(r.encryption_or_anonymization[0].source_category, SourceCategory::Contact);
        assert_eq!(r.logging, [CategoryCount { source_category: SourceCategory::Contact, count: 1 }]);
        assert_eq!(build_ropa(&[]), RopaSummary::default());
    }

    #[test]
    fn coverage_notation() {
        let fs = vec![
            finding("a", 0, "account", "account", &[SourceCategory::Account], SinkCategory::Database),
            finding("a", 1, "email", "email", &[SourceCategory::Contact], SinkCategory::Log),
            finding("a", 2, "city", "city", &[SourceCategory::Location], SinkCategory::Log),
        ];
        let r = build_ropa(&fs);
        let declared = parse_declared("ACC, CON").unwrap();
        assert_eq!(coverage_diff(&r, &declared).to_string(), "-LOC");
        let declared = parse_declared("[ACC, CON, LOC, HEA]").unwrap();
        assert_eq!(coverage_diff(&r, &declared).to_string(), "+");
        let declared = parse_declared("categories:\n  - ACC\n").unwrap();
        assert_eq!(coverage_diff(&r, &declared).to_string(), "-CON, -LOC");
        assert!(parse_declared("XYZ").is_err());
    }
}
