use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pdflow_core::report::text::{self, Format};
use pdflow_core::report::{emit_findings_json, emit_mermaid, emit_sarif, load_findings_json, FindingsDocument};
use pdflow_core::rulepack::RulePack;
use pdflow_core::scan::{scan, ScanConfig};
use pdflow_core::triage::{apply_labels, precision_table, LabelStore, TriageLabel};
use pdflow_core::views::{build_flow_table, build_heatmap, build_ropa, build_type_view, coverage_diff, parse_declared};

use crate::args::{ExportCommand, OutputFormat, ScanArgs, TriageCommand, ViewArgs, ViewKind};

pub fn load_document(path: &Path) -> Result<FindingsDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read findings document {}", path.display()))?;
    load_findings_json(&text).with_context(|| format!("cannot load {}", path.display()))
}

pub fn load_labels(path: &Path) -> Result<LabelStore> {
    match std::fs::read_to_string(path) {
        Ok(text) => LabelStore::parse(&text).with_context(|| format!("cannot load labels {}", path.display())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(LabelStore::default()),
        Err(e) => Err(e).with_context(|| format!("cannot read labels {}", path.display())),
    }
}

/// Replaces `path` in one rename so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot replace {}", path.display()))?;
    Ok(())
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
        Some(p) if p == Path::new("-") => write_output(None, contents),
        Some(p) => write_atomic(p, contents),
    }
}

fn text_format(format: OutputFormat) -> Format {
    match format {
        OutputFormat::Markdown => Format::Markdown,
        _ => Format::Text,
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("view types serialize");
    s.push('\n');
    s
}

pub fn cmd_scan(args: &ScanArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let pack = RulePack::load(&args.rules).with_context(|| format!("cannot load rule pack `{}`", args.rules))?;
    let config = ScanConfig {
        paths: args.paths.clone(),
        languages: args.languages.clone(),
        propagation: !args.no_propagation,
        workers: args.workers,
        timing: args.timing,
    };
    let outcome = scan(&config, &pack)?;
    for d in &outcome.diagnostics {
        eprintln!("warning: {d}");
    }
    let doc = &outcome.document;
    write_output(Some(&args.out), &emit_findings_json(doc))?;
    if let Some(sarif) = &args.sarif {
        write_output(Some(sarif), &emit_sarif(doc))?;
    }
    let s = &doc.stats;
    eprintln!(
        "scanned {} files ({} skipped), {} statements: {} findings, {} source-only, {} sink-only, {} unclassifiable in {} ms",
        s.files,
        s.skipped_files,
        s.statements,
        s.findings,
        s.source_only,
        s.sink_only,
        s.unclassifiable,
        started.elapsed().as_millis()
    );
    if args.out != Path::new("-") {
        eprintln!("findings written to {}", args.out.display());
    }
    if args.fail_on_findings && !doc.findings.is_empty() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn render_view(doc: &FindingsDocument, args: &ViewArgs) -> Result<String> {
    let findings = &doc.findings;
    Ok(match (args.kind, args.format) {
        (ViewKind::Types, OutputFormat::Mermaid) => emit_mermaid(&build_type_view(findings)),
        (ViewKind::Types, OutputFormat::Json) => json(&build_type_view(findings)),
        (ViewKind::Types, f) => text::type_tree(&build_type_view(findings), text_format(f)),
        (ViewKind::Flows, OutputFormat::Json) => json(&build_flow_table(findings, args.group_by, &args.filter)),
        (ViewKind::Heatmap, OutputFormat::Json) => json(&build_heatmap(findings)),
        (_, OutputFormat::Mermaid) => bail!("mermaid output is only available for the types view"),
        (ViewKind::Flows, f) => text::flow_table(&build_flow_table(findings, args.group_by, &args.filter), text_format(f)),
        (ViewKind::Heatmap, f) => text::heatmap(&build_heatmap(findings), text_format(f)),
    })
}

pub fn cmd_view(args: &ViewArgs) -> Result<ExitCode> {
    let doc = load_document(&args.input.findings)?;
    write_output(None, &render_view(&doc, args)?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_export(cmd: &ExportCommand) -> Result<ExitCode> {
    match cmd {
        ExportCommand::Ropa { input, declared, out } => {
            let doc = load_document(&input.findings)?;
            let summary = build_ropa(&doc.findings);
            let coverage = match declared {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                    let declared = parse_declared(&text).with_context(|| format!("cannot parse {}", path.display()))?;
                    Some(coverage_diff(&summary, &declared))
                }
                None => None,
            };
            write_output(out.as_deref(), &text::ropa_markdown(&summary, coverage.as_ref()))?;
        }
        ExportCommand::Sarif { input, out } => {
            let doc = load_document(&input.findings)?;
            write_output(out.as_deref(), &emit_sarif(&doc))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn cmd_triage(cmd: &TriageCommand) -> Result<ExitCode> {
    match cmd {
        TriageCommand::Label {
            finding_id,
            verdict,
            note,
            reviewer,
            input,
            labels,
        } => {
            let doc = load_document(&input.findings)?;
            if doc.finding(finding_id).is_none() {
                bail!("no finding with id `{finding_id}` in {}", input.findings.display());
            }
            let mut store = load_labels(labels)?;
            store.upsert(TriageLabel {
                finding_id: finding_id.clone(),
                verdict: *verdict,
                note: note.clone(),
                reviewer: reviewer.clone(),
                timestamp: now_rfc3339(),
            });
            write_atomic(labels, &store.to_json())?;
        }
        TriageCommand::Metrics {
            input,
            labels,
            threshold,
            format,
        } => {
            let doc = load_document(&input.findings)?;
            let store = load_labels(labels)?;
            let labeled = apply_labels(&doc, store.labels());
            for w in &labeled.warnings {
                eprintln!("warning: {w}");
            }
            let table = precision_table(&doc, &labeled, *threshold);
            let out = match format {
                OutputFormat::Json => json(&table),
                OutputFormat::Mermaid => bail!("mermaid output is only available for the types view"),
                f => text::precision(&table, text_format(*f)),
            };
            write_output(None, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
