use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdflow_core::stmt::Language;
use pdflow_core::triage::{Verdict, DEFAULT_SUPPRESSION_THRESHOLD};
use pdflow_core::views::{Filter, TableKey};

pub const DEFAULT_FINDINGS: &str = "pdflow-findings.json";
pub const DEFAULT_LABELS: &str = "pdflow-labels.json";

#[derive(Debug, Parser)]
#[command(name = "pdflow", version, about = "Find and review personal-data flows in Java, JavaScript and TypeScript code")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan source trees and write a findings document.
    Scan(ScanArgs),
    /// Render a view of a findings document.
    View(ViewArgs),
    /// Export a ROPA summary or SARIF log.
    #[command(subcommand)]
    Export(ExportCommand),
    /// Record verdicts and compute precision.
    #[command(subcommand)]
    Triage(TriageCommand),
    /// Serve the JSON API and review page on localhost.
    Serve(ServeArgs),
}

fn parse_language(s: &str) -> Result<Language, String> {
    Language::parse(s).ok_or_else(|| format!("unknown language `{s}` (expected java, js or ts)"))
}

fn parse_key(s: &str) -> Result<TableKey, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_filter(s: &str) -> Result<Filter, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_verdict(s: &str) -> Result<Verdict, String> {
    s.parse()
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Files or directories to scan.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Restrict to these languages (comma separated: java, js, ts).
    #[arg(long = "lang", value_delimiter = ',', value_parser = parse_language)]
    pub languages: Vec<Language>,
    /// Rule pack YAML file, or `default` for the bundled pack.
    #[arg(long, env = "PDFLOW_RULES", default_value = "default")]
    pub rules: String,
    /// Do not turn assignment targets of solid flows into new sources.
    #[arg(long)]
    pub no_propagation: bool,
    /// Findings JSON output path (`-` for stdout).
    #[arg(short, long, default_value = DEFAULT_FINDINGS)]
    pub out: PathBuf,
    /// Also write a SARIF log here.
    #[arg(long)]
    pub sarif: Option<PathBuf>,
    /// Worker threads.
    #[arg(short = 'j', long, default_value_t = default_workers())]
    pub workers: usize,
    /// Exit with status 1 when there are findings.
    #[arg(long)]
    pub fail_on_findings: bool,
    /// Record elapsed time in the findings document (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewKind {
    Types,
    Flows,
    Heatmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Markdown,
    Mermaid,
    Json,
}

#[derive(Debug, Args)]
pub struct FindingsArg {
    /// Findings document written by `scan`.
    #[arg(long, default_value = DEFAULT_FINDINGS)]
    pub findings: PathBuf,
}

#[derive(Debug, Args)]
pub struct ViewArgs {
    pub kind: ViewKind,
    #[command(flatten)]
    pub input: FindingsArg,
    /// Group flow rows by source-stem, source-category, sink-category,
    /// sink-name, file, pattern-shape or confidence.
    #[arg(long, value_parser = parse_key, default_value = "none")]
    pub group_by: TableKey,
    /// `key=value` row filter; repeat for several. Same key: any may match.
    #[arg(long, value_parser = parse_filter)]
    pub filter: Vec<Filter>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum ExportCommand {
    /// Markdown summary aligned with a record of processing activities.
    Ropa {
        #[command(flatten)]
        input: FindingsArg,
        /// Categories already declared (YAML list or plain abbreviations).
        #[arg(long)]
        declared: Option<PathBuf>,
        /// Output path (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// SARIF 2.1.0 log.
    Sarif {
        #[command(flatten)]
        input: FindingsArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TriageCommand {
    /// Record a verdict for one finding.
    Label {
        finding_id: String,
        #[arg(value_parser = parse_verdict)]
        verdict: Verdict,
        #[arg(long)]
        note: Option<String>,
        #[arg(long)]
        reviewer: Option<String>,
        #[command(flatten)]
        input: FindingsArg,
        #[arg(long, default_value = DEFAULT_LABELS)]
        labels: PathBuf,
    },
    /// Precision per source and sink category.
    Metrics {
        #[command(flatten)]
        input: FindingsArg,
        #[arg(long, default_value = DEFAULT_LABELS)]
        labels: PathBuf,
        /// Cells with fewer reviewed findings show `-`.
        #[arg(long, default_value_t = DEFAULT_SUPPRESSION_THRESHOLD)]
        threshold: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub input: FindingsArg,
    #[arg(long, default_value = DEFAULT_LABELS)]
    pub labels: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    /// Directory the finding paths are relative to; defaults to the scan root.
    #[arg(long)]
    pub root: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SUPPRESSION_THRESHOLD)]
    pub threshold: usize,
}
