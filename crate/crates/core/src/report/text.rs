//! Plain-text and markdown renderings of the views.

use std::fmt::Write;

use crate::rulepack::{SinkCategory, SourceCategory};
use crate::triage::PrecisionTable;
use crate::views::{CategoryCount, Coverage, DataTypeTree, FlowTable, HeatmapStats, RopaSummary, TableKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Markdown,
}

pub const FLOW_COLUMNS: [&str; 5] = ["Path", "Source", "Sink", "Sink Type", "Flow Pattern Instance"];

fn escape_md(cell: &str) -> String {
    cell.replace('|', "\\|").replace('\n', " ")
}

/// Aligned columns for text, a pipe table for markdown.
pub fn render_table(headers: &[&str], rows: &[Vec<String>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Markdown => {
            let _ = writeln!(out, "| {} |", headers.join(" | "));
            let _ = writeln!(out, "|{}|", vec!["---"; headers.len()].join("|"));
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| escape_md(c)).collect();
                let _ = writeln!(out, "| {} |", cells.join(" | "));
            }
        }
        Format::Text => {
            let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.replace('\n', " ").chars().count());
                }
            }
            let line = |cells: Vec<String>| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}", w = *w))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(headers.iter().map(|h| h.to_string()).collect()));
            let _ = writeln!(out, "{}", line(widths.iter().map(|w| "-".repeat(*w)).collect()));
            for row in rows {
                let _ = writeln!(out, "{}", line(row.iter().map(|c| c.replace('\n', " ")).collect()));
            }
        }
    }
    out
}

pub fn type_tree(tree: &DataTypeTree, format: Format) -> String {
    let mut out = String::new();
    let (bullet, indent) = match format {
        Format::Markdown => ("- ", "  "),
        Format::Text => ("", "  "),
    };
    let _ = writeln!(out, "{bullet}personal data ({})", tree.total);
    for cat in &tree.categories {
        let _ = writeln!(
            out,
            "{indent}{bullet}{} {} ({})",
            cat.category.abbreviation(),
            cat.label,
            cat.count
        );
        for stem in &cat.stems {
            let _ = writeln!(out, "{indent}{indent}{bullet}{} ({})", stem.stem, stem.count);
            for v in &stem.variants {
                let _ = writeln!(out, "{indent}{indent}{indent}{bullet}{} ({})", v.name, v.count);
            }
        }
    }
    out
}

pub fn flow_table(table: &FlowTable, format: Format) -> String {
    let mut out = String::new();
    for (i, group) in table.groups.iter().enumerate() {
        if table.group_by != TableKey::None {
            if i > 0 {
                out.push('\n');
            }
            let heading = format!("{} = {} ({} rows)", table.group_by, group.key, group.rows.len());
            match format {
                Format::Markdown => {
                    let _ = writeln!(out, "### {heading}\n");
                }
                Format::Text => {
                    let _ = writeln!(out, "[{heading}]");
                }
            }
        }
        let rows: Vec<Vec<String>> = group
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.path.clone(),
                    r.source.clone(),
                    r.sink.clone(),
                    r.sink_type.clone(),
                    r.flow_pattern_instance.clone(),
                ]
            })
            .collect();
        out.push_str(&render_table(&FLOW_COLUMNS, &rows, format));
    }
    if table.groups.is_empty() {
        out.push_str(&render_table(&FLOW_COLUMNS, &[], format));
    }
    out
}

pub fn heatmap(h: &HeatmapStats, format: Format) -> String {
    let mut headers: Vec<&str> = vec!["Source"];
    headers.extend(h.sinks.iter().map(|s| s.abbreviation()));
    headers.push("Total");
    let mut rows: Vec<Vec<String>> = h
        .sources
        .iter()
        .map(|s| {
            let mut row = vec![s.abbreviation().to_string()];
            row.extend(h.counts[s.index()].iter().map(|c| c.to_string()));
            row.push(h.row_totals[s.index()].to_string());
            row
        })
        .collect();
    let mut totals = vec!["Total".to_string()];
    totals.extend(h.column_totals.iter().map(|c| c.to_string()));
    totals.push(h.total.to_string());
    rows.push(totals);
    render_table(&headers, &rows, format)
}

fn category_list(cats: &[SourceCategory]) -> String {
    if cats.is_empty() {
        return "none".to_string();
    }
    cats.iter()
        .map(|c| format!("{} ({})", c.label(), c.abbreviation()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn counts_list(out: &mut String, counts: &[CategoryCount]) {
    if counts.is_empty() {
        let _ = writeln!(out, "- none found");
    }
    for c in counts {
        let _ = writeln!(
            out,
            "- {} ({}): {}",
            c.source_category.label(),
            c.source_category.abbreviation(),
            c.count
        );
    }
}

/// Markdown ROPA summary with placeholders for fields code cannot tell.
pub fn ropa_markdown(summary: &RopaSummary, coverage: Option<&Coverage>) -> String {
    let mut out = String::from("# Record of processing activities (code-derived summary)\n\n");
    let _ = writeln!(out, "## Categories of personal data\n");
    let _ = writeln!(out, "{}\n", category_list(&summary.categories_of_personal_data));
    if let Some(cov) = coverage {
        let _ = writeln!(out, "Declared: {}\n", category_list(&cov.declared));
        let _ = writeln!(out, "Coverage: {cov}\n");
    }

    let _ = writeln!(out, "## Categories of processing\n");
    if summary.categories_of_processing.is_empty() {
        let _ = writeln!(out, "- none found");
    }
    for p in &summary.categories_of_processing {
        let sources: Vec<&str> = p.source_categories.iter().map(|c| c.abbreviation()).collect();
        let _ = writeln!(
            out,
            "- {} ({}): {} {} from {}",
            p.sink_category.label(),
            p.sink_category.abbreviation(),
            p.findings,
            if p.findings == 1 { "flow" } else { "flows" },
            sources.join(", ")
        );
    }

    let _ = writeln!(out, "\n## Transfers to databases or third parties\n");
    if summary.database_or_third_party_transfers.is_empty() {
        let _ = writeln!(out, "- none found");
    }
    for t in &summary.database_or_third_party_transfers {
        let parts: Vec<String> = t
            .sources
            .iter()
            .map(|c| format!("{} {}", c.source_category.abbreviation(), c.count))
            .collect();
        let _ = writeln!(
            out,
            "- {} ({}): {}",
            t.sink_category.label(),
            t.sink_category.abbreviation(),
            parts.join(", ")
        );
    }

    let _ = writeln!(out, "\n## Encryption or anonymization\n");
    counts_list(&mut out, &summary.encryption_or_anonymization);

    let _ = writeln!(out, "\n## Personal data logging\n");
    counts_list(&mut out, &summary.logging);

    let _ = writeln!(out, "\n## To be completed manually\n");
    let _ = writeln!(out, "- Purposes of processing: _TODO_");
    let _ = writeln!(out, "- Recipients: _TODO_");
    let _ = writeln!(out, "- Retention periods: _TODO_");
    let _ = writeln!(out, "- Transfers to third countries: _TODO_");
    out
}

pub fn precision(table: &PrecisionTable, format: Format) -> String {
    let mut headers: Vec<&str> = vec!["Source"];
    headers.extend(SinkCategory::ALL.iter().map(|s| s.abbreviation()));
    let rows: Vec<Vec<String>> = SourceCategory::ALL
        .iter()
        .map(|&s| {
            let mut row = vec![s.abbreviation().to_string()];
            row.extend(SinkCategory::ALL.iter().map(|&k| table.cell(s, k).to_string()));
            row
        })
        .collect();
    let mut out = render_table(&headers, &rows, format);
    let _ = writeln!(
        out,
        "\nreviewed {} of {} findings ({:.0}%); cells with fewer than {} reviewed show \"-\"",
        table.reviewed,
        table.total,
        table.coverage * 100.0,
        table.threshold
    );
    out
}
