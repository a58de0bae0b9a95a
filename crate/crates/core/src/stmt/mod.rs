//! Lightweight statement extraction for Java, JavaScript and TypeScript.
//!
//! This is not a parser. A tolerant lexer feeds a block/statement scanner
//! that recovers just enough structure for flow classification: the
//! assignment target, the outermost call's receiver chain, callee and
//! arguments, and the enclosing function scope.

mod extract;
pub mod lexer;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use extract::{extract_statements, normalize_chain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    JavaScript,
    TypeScript,
}

impl Language {
    pub fn from_path(path: &Path) -> Option<Language> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "java" => Some(Language::Java),
            "js" | "jsx" | "mjs" | "cjs" => Some(Language::JavaScript),
            "ts" | "tsx" | "mts" | "cts" => Some(Language::TypeScript),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::TypeScript => "typescript",
        }
    }

    pub fn parse(name: &str) -> Option<Language> {
        match name.trim().to_ascii_lowercase().as_str() {
            "java" => Some(Language::Java),
            "js" | "javascript" | "jsx" => Some(Language::JavaScript),
            "ts" | "typescript" | "tsx" => Some(Language::TypeScript),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StmtError {
    #[error("unsupported language for {0}")]
    UnsupportedLanguage(String),
    #[error("{0} is not valid UTF-8")]
    Undecodable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Repository-relative path with `/` separators.
    pub path: String,
    pub language: Language,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, language: Language, text: impl Into<String>) -> Self {
        SourceFile {
            path: path.into(),
            language,
            text: text.into(),
        }
    }

    /// Builds a source file from raw bytes, inferring the language from the
    /// extension.
    pub fn from_bytes(path: &str, bytes: Vec<u8>) -> Result<SourceFile, StmtError> {
        let language = Language::from_path(Path::new(path))
            .ok_or_else(|| StmtError::UnsupportedLanguage(path.to_string()))?;
        let text = String::from_utf8(bytes).map_err(|_| StmtError::Undecodable(path.to_string()))?;
        Ok(SourceFile {
            path: path.to_string(),
            language,
            text,
        })
    }
}

/// Byte range plus 1-based line/column positions. `end_col` is the column
/// just past the last character, as in SARIF regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Assignment { target: Vec<String> },
    ExpressionCall,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub file: String,
    pub span: Span,
    pub text: String,
    pub kind: StatementKind,
    pub call: Option<CallExpr>,
    pub scope_id: u32,
}

impl Statement {
    pub fn target(&self) -> Option<&[String]> {
        match &self.kind {
            StatementKind::Assignment { target } => Some(target),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallExpr {
    /// Dotted chain before the callee, `this` removed. Calls earlier in a
    /// method chain appear here by name.
    pub receiver: Vec<String>,
    pub callee: String,
    /// The callee as written, e.g. `this.usersRepository.findOne`.
    pub callee_text: String,
    pub args: Vec<Arg>,
    /// Calls inside the arguments and earlier links of the method chain.
    pub nested: Vec<CallExpr>,
    /// 0 for the outermost call of a statement.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgKind {
    Identifier(Vec<String>),
    StringLiteral(String),
    NumberLiteral,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arg {
    pub kind: ArgKind,
    pub text: String,
    /// Every identifier chain inside the argument, nested calls included
    /// (callee names excluded).
    pub idents: Vec<Vec<String>>,
    /// Contents of every string literal inside the argument.
    pub strings: Vec<String>,
}
