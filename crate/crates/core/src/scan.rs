//! Directory walking and parallel analysis.
//!
//! Files are listed in sorted order, analysed on a rayon pool of the
//! requested size, and merged in listing order, so the findings document
//! does not depend on the worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::report::{FindingsDocument, ScanOptions, ScanStats};
use crate::rulepack::RulePack;
use crate::stmt::{Language, SourceFile};
use crate::taint::{analyze_file, AnalyzeOptions, FileAnalysis};

/// Directories never descended into.
const SKIPPED_DIRS: &[&str] = &["node_modules", ".git", ".hg", ".svn", "target"];

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("no input paths given")]
    NoInput,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub paths: Vec<PathBuf>,
    /// Restrict to these languages; empty means all supported.
    pub languages: Vec<Language>,
    pub propagation: bool,
    pub workers: usize,
    /// Record `elapsed_ms` in the document.
    pub timing: bool,
}

impl ScanConfig {
    pub fn new(paths: Vec<PathBuf>) -> Self {
        ScanConfig {
            paths,
            languages: Vec::new(),
            propagation: true,
            workers: 1,
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub document: FindingsDocument,
    /// Skipped files and similar non-fatal problems.
    pub diagnostics: Vec<String>,
}

struct Input {
    abs: PathBuf,
    rel: String,
    language: Language,
}

fn to_slash(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Base directory for relative finding paths: the single input directory,
/// the parent of a single input file, otherwise the current directory.
fn base_dir(paths: &[PathBuf]) -> PathBuf {
    if let [only] = paths {
        if only.is_dir() {
            return only.clone();
        }
        if let Some(parent) = only.parent() {
            return parent.to_path_buf();
        }
    }
    PathBuf::from(".")
}

fn relative(path: &Path, base: &Path) -> String {
    let rel = path.strip_prefix(base).unwrap_or(path);
    let rel = rel.strip_prefix(".").unwrap_or(rel);
    to_slash(rel)
}

fn collect_inputs(config: &ScanConfig, base: &Path) -> Result<Vec<Input>, ScanError> {
    let mut inputs = Vec::new();
    for root in &config.paths {
        if !root.exists() {
            return Err(ScanError::Io {
                path: root.display().to_string(),
                message: "no such file or directory".to_string(),
            });
        }
        let walker = WalkDir::new(root)
            .follow_links(false)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| {
                e.depth() == 0
                    || !e.file_type().is_dir()
                    || !e
                        .file_name()
                        .to_str()
                        .is_some_and(|n| SKIPPED_DIRS.contains(&n))
            });
        for entry in walker {
            let entry = entry.map_err(|e| ScanError::Io {
                path: root.display().to_string(),
                message: e.to_string(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let Some(language) = Language::from_path(entry.path()) else {
                continue;
            };
            if !config.languages.is_empty() && !config.languages.contains(&language) {
                continue;
            }
            inputs.push(Input {
                abs: entry.path().to_path_buf(),
                rel: relative(entry.path(), base),
                language,
            });
        }
    }
    inputs.sort_by(|a, b| a.rel.cmp(&b.rel));
    inputs.dedup_by(|a, b| a.rel == b.rel);
    Ok(inputs)
}

enum FileResult {
    Done(FileAnalysis),
    Skipped(String),
}

fn analyze_input(input: &Input, pack: &RulePack, opts: AnalyzeOptions) -> FileResult {
    let bytes = match std::fs::read(&input.abs) {
        Ok(b) => b,
        Err(e) => return FileResult::Skipped(format!("{}: {e}", input.rel)),
    };
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => return FileResult::Skipped(format!("{}: not valid UTF-8, skipped", input.rel)),
    };
    let file = SourceFile::new(input.rel.clone(), input.language, text);
    FileResult::Done(analyze_file(&file, pack, opts))
}

pub fn scan(config: &ScanConfig, pack: &RulePack) -> Result<ScanOutcome, ScanError> {
    if config.paths.is_empty() {
        return Err(ScanError::NoInput);
    }
    if config.workers == 0 {
        return Err(ScanError::NoWorkers);
    }
    let started = Instant::now();
    let base = base_dir(&config.paths);
    let inputs = collect_inputs(config, &base)?;
    let opts = AnalyzeOptions {
        propagation: config.propagation,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| ScanError::Pool(e.to_string()))?;
    let results: Vec<FileResult> = pool.install(|| inputs.par_iter().map(|i| analyze_input(i, pack, opts)).collect());

    let mut stats = ScanStats::default();
    let mut findings = Vec::new();
    let mut diagnostics = Vec::new();
    for result in results {
        match result {
            FileResult::Done(analysis) => {
                stats.files += 1;
                stats.statements += analysis.statements;
                stats.source_only += analysis.stats.source_only;
                stats.sink_only += analysis.stats.sink_only;
                stats.inner_sinks += analysis.stats.inner_sinks;
                stats.unclassifiable += analysis.stats.unclassifiable;
                findings.extend(analysis.findings);
            }
            FileResult::Skipped(msg) => {
                stats.skipped_files += 1;
                diagnostics.push(msg);
            }
        }
    }
    findings.sort_by(|a, b| {
        (a.path.as_str(), a.span.start_byte, a.span.end_byte).cmp(&(b.path.as_str(), b.span.start_byte, b.span.end_byte))
    });
    stats.findings = findings.len();
    if config.timing {
        stats.elapsed_ms = Some(started.elapsed().as_millis() as u64);
    }
    let mut document = FindingsDocument::new(pack.version(), &to_slash(&base), findings);
    document.stats = stats;
    document.options = ScanOptions {
        propagation: config.propagation,
    };
    Ok(ScanOutcome { document, diagnostics })
}
