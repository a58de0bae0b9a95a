//! Tolerant tokenizer shared by Java, JavaScript and TypeScript.
//!
//! Never fails: unknown bytes become single-byte punctuation, unterminated
//! strings stop at the end of the line, unterminated comments run to EOF.

use super::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    /// Quoted string, char literal, Java text block or JS template literal.
    Str,
    /// JS regular-expression literal.
    Regex,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
    /// A line break occurred between the previous token and this one.
    pub nl_before: bool,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }

    pub fn is_punct(&self, src: &str, p: &str) -> bool {
        self.kind == TokKind::Punct && self.text(src) == p
    }

    pub fn is_ident(&self, src: &str, word: &str) -> bool {
        self.kind == TokKind::Ident && self.text(src) == word
    }
}

/// Content of a string token without its delimiters.
pub fn string_content(tok: &Token, src: &str) -> String {
    let text = tok.text(src);
    let inner = if text.starts_with("\"\"\"") && text.len() >= 6 && text.ends_with("\"\"\"") {
        &text[3..text.len() - 3]
    } else if text.len() >= 2 {
        let first = text.as_bytes()[0];
        let last = text.as_bytes()[text.len() - 1];
        if first == last && matches!(first, b'"' | b'\'' | b'`') {
            &text[1..text.len() - 1]
        } else {
            &text[1..]
        }
    } else {
        ""
    };
    inner.to_string()
}

const PUNCTS: [&str; 37] = [
    "...", "===", "!==", "**=", "<<=", "&&=", "||=", "??=", "=>", "->", "==", "!=", "<=", ">=",
    "&&", "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "::",
    "<<", "@", "#", "~", "\\", "`", "$",
];

const REGEX_PRECEDING_WORDS: [&str; 14] = [
    "return", "typeof", "case", "do", "else", "in", "of", "new", "delete", "void", "throw", "yield",
    "await", "instanceof",
];

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

pub fn tokenize(src: &str, lang: Language) -> Vec<Token> {
    let bytes = src.as_bytes();
    let len = bytes.len();
    let mut tokens: Vec<Token> = Vec::new();
    let mut i = 0;
    let mut nl = false;

    while i < len {
        let b = bytes[i];
        if b == b'\n' {
            nl = true;
            i += 1;
            continue;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b == b'/' && i + 1 < len && bytes[i + 1] == b'/' {
            while i < len && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if b == b'/' && i + 1 < len && bytes[i + 1] == b'*' {
            i += 2;
            while i < len && !(bytes[i] == b'*' && i + 1 < len && bytes[i + 1] == b'/') {
                if bytes[i] == b'\n' {
                    nl = true;
                }
                i += 1;
            }
            i = (i + 2).min(len);
            continue;
        }

        let start = i;
        let kind;
        if is_ident_start(b) {
            i += 1;
            while i < len && is_ident_continue(bytes[i]) {
                i += 1;
            }
            kind = TokKind::Ident;
        } else if b.is_ascii_digit() || (b == b'.' && i + 1 < len && bytes[i + 1].is_ascii_digit()) {
            i += 1;
            while i < len {
                let c = bytes[i];
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' {
                    i += 1;
                } else if (c == b'+' || c == b'-') && matches!(bytes[i - 1], b'e' | b'E') {
                    i += 1;
                } else {
                    break;
                }
            }
            kind = TokKind::Number;
        } else if b == b'"' && lang == Language::Java && src[i..].starts_with("\"\"\"") {
            i = match src[i + 3..].find("\"\"\"") {
                Some(off) => i + 3 + off + 3,
                None => len,
            };
            kind = TokKind::Str;
        } else if b == b'"' || b == b'\'' {
            i = skip_quoted(bytes, i);
            kind = TokKind::Str;
        } else if b == b'`' && lang != Language::Java {
            i = skip_template(bytes, i);
            kind = TokKind::Str;
        } else if b == b'/' && lang != Language::Java && regex_allowed(&tokens, src) {
            match skip_regex(bytes, i) {
                Some(end) => {
                    i = end;
                    kind = TokKind::Regex;
                }
                None => {
                    i += if i + 1 < len && bytes[i + 1] == b'=' { 2 } else { 1 };
                    kind = TokKind::Punct;
                }
            }
        } else {
            let rest = &src[i..];
            let matched = PUNCTS
                .iter()
                .find(|p| rest.starts_with(**p))
                .filter(|p| !(**p == "?." && rest.as_bytes().get(2).is_some_and(u8::is_ascii_digit)));
            i += match matched {
                Some(p) => p.len(),
                None => {
                    // Advance by one whole char so slices stay on boundaries.
                    rest.chars().next().map(char::len_utf8).unwrap_or(1)
                }
            };
            kind = TokKind::Punct;
        }
        tokens.push(Token {
            kind,
            start,
            end: i,
            nl_before: nl,
        });
        nl = false;
    }
    tokens
}

fn skip_quoted(bytes: &[u8], start: usize) -> usize {
    let quote = bytes[start];
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

fn skip_template(bytes: &[u8], start: usize) -> usize {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'`' => return i + 1,
            b'$' if bytes.get(i + 1) == Some(&b'{') => {
                i = skip_interpolation(bytes, i + 2);
            }
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Skips a `${ ... }` body, returning the index after the closing brace.
fn skip_interpolation(bytes: &[u8], mut i: usize) -> usize {
    let mut depth = 1usize;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            b'"' | b'\'' => {
                i = skip_quoted(bytes, i);
                continue;
            }
            b'`' => {
                i = skip_template(bytes, i);
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    bytes.len()
}

fn regex_allowed(tokens: &[Token], src: &str) -> bool {
    let Some(prev) = tokens.last() else {
        return true;
    };
    match prev.kind {
        TokKind::Number | TokKind::Str | TokKind::Regex => false,
        TokKind::Ident => REGEX_PRECEDING_WORDS.contains(&prev.text(src)),
        TokKind::Punct => !matches!(prev.text(src), ")" | "]" | "}" | "++" | "--"),
    }
}

fn skip_regex(bytes: &[u8], start: usize) -> Option<usize> {
    let mut i = start + 1;
    let mut in_class = false;
    if matches!(bytes.get(i), Some(b'/') | Some(b'*') | None) {
        return None;
    }
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return None,
            b'[' => {
                in_class = true;
                i += 1;
            }
            b']' => {
                in_class = false;
                i += 1;
            }
            b'/' if !in_class => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                return Some(i);
            }
            _ => i += 1,
        }
    }
    None
}
