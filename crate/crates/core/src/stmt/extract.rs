use super::lexer::{string_content, tokenize, TokKind, Token};
use super::{Arg, ArgKind, CallExpr, Language, SourceFile, Span, Statement, StatementKind};

const KEYWORDS: &[&str] = &[
    "abstract", "as", "async", "await", "break", "case", "catch", "class", "const", "continue",
    "default", "delete", "do", "else", "enum", "export", "extends", "false", "final", "finally",
    "for", "from", "function", "if", "implements", "import", "in", "instanceof", "interface", "let",
    "new", "null", "of", "package", "private", "protected", "public", "readonly", "return", "static",
    "super", "switch", "this", "throw", "throws", "true", "try", "typeof", "undefined", "var",
    "void", "while", "yield",
];

/// Leading words dropped before a statement is analysed.
const LEADING_WORDS: &[&str] = &[
    "export", "default", "declare", "public", "private", "protected", "static", "readonly",
    "final", "abstract", "async", "const", "let", "var", "override", "transient", "volatile",
    "return", "await", "yield", "throw", "void",
];

/// Statements starting with these words are never classified.
const OTHER_WORDS: &[&str] = &[
    "import", "package", "type", "interface", "enum", "class", "case", "default", "break",
    "continue", "goto", "assert", "typeof", "delete", "throws", "namespace", "module", "declare",
];

const HEADER_WORDS: &[&str] = &["if", "while", "for", "switch", "catch", "with", "synchronized", "try"];

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**=", "<<=", "&&=", "||=", "??=",
];

const CONTINUATION_PUNCT: &[&str] = &[
    ".", "?.", ",", "+", "-", "*", "/", "%", "=", "==", "===", "!=", "!==", "<", ">", "<=", ">=",
    "&&", "||", "??", "?", ":", "=>", ")", "]", "|", "&", "^", "{", "+=", "-=", "*=", "/=", "%=",
    "**", "**=", "&&=", "||=", "??=",
];

const CONTINUATION_WORDS: &[&str] = &["instanceof", "in", "as", "satisfies", "extends", "implements"];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn position(&self, src: &str, byte: usize) -> (usize, usize) {
        let line = match self.starts.binary_search(&byte) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        let col = src[self.starts[line]..byte].chars().count() + 1;
        (line + 1, col)
    }
}

/// Splits a file into statements in source order.
pub fn extract_statements(file: &SourceFile) -> Vec<Statement> {
    let toks = tokenize(&file.text, file.language);
    let mut ex = Extractor {
        src: &file.text,
        toks: &toks,
        lang: file.language,
        path: &file.path,
        lines: LineIndex::new(&file.text),
        out: Vec::new(),
        next_scope: 1,
    };
    let mut i = 0;
    ex.block(&mut i, 0, true);
    let mut out = ex.out;
    out.sort_by_key(|s| (s.span.start_byte, s.span.end_byte));
    out
}

/// Normalizes a dotted/bracketed access expression into its identifier
/// chain: `this.usersRepository.findOne` becomes `[usersRepository, findOne]`.
/// Returns `None` when the text is not a plain access chain.
pub fn normalize_chain(raw: &str) -> Option<Vec<String>> {
    let toks = tokenize(raw, Language::TypeScript);
    if toks.is_empty() {
        return None;
    }
    let view = TokView { src: raw, toks: &toks };
    let chain = view.parse_chain(0, toks.len())?;
    if chain.end != toks.len() || !chain.calls.is_empty() || chain.segs.is_empty() {
        return None;
    }
    Some(chain.segs)
}

struct Extractor<'a> {
    src: &'a str,
    toks: &'a [Token],
    lang: Language,
    path: &'a str,
    lines: LineIndex,
    out: Vec<Statement>,
    next_scope: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Delim {
    Paren,
    Bracket,
    Brace,
}

impl<'a> Extractor<'a> {
    fn view(&self) -> TokView<'a> {
        TokView {
            src: self.src,
            toks: self.toks,
        }
    }

    fn text(&self, i: usize) -> &'a str {
        self.toks[i].text(self.src)
    }

    fn punct(&self, i: usize, p: &str) -> bool {
        self.toks.get(i).is_some_and(|t| t.is_punct(self.src, p))
    }

    fn word(&self, i: usize) -> Option<&'a str> {
        self.toks
            .get(i)
            .filter(|t| t.kind == TokKind::Ident)
            .map(|t| t.text(self.src))
    }

    fn completes(&self, i: usize) -> bool {
        let t = &self.toks[i];
        match t.kind {
            TokKind::Ident | TokKind::Number | TokKind::Str | TokKind::Regex => true,
            TokKind::Punct => matches!(t.text(self.src), ")" | "]" | "}" | "++" | "--"),
        }
    }

    fn continues(&self, i: usize) -> bool {
        let t = &self.toks[i];
        match t.kind {
            TokKind::Punct => CONTINUATION_PUNCT.contains(&t.text(self.src)),
            TokKind::Ident => CONTINUATION_WORDS.contains(&t.text(self.src)),
            _ => false,
        }
    }

    /// Skips `@Name(.Name)*(...)?`; returns the index after it.
    fn skip_annotation(&self, mut i: usize) -> usize {
        i += 1;
        if self.word(i).is_none() {
            return i;
        }
        i += 1;
        while self.punct(i, ".") && self.word(i + 1).is_some() {
            i += 2;
        }
        if self.punct(i, "(") {
            if let Some(close) = self.view().matching(i) {
                return close + 1;
            }
        }
        i
    }

    /// Scans statements until the `}` closing this block (consumed) or EOF.
    fn block(&mut self, i: &mut usize, scope: u32, top: bool) {
        let n = self.toks.len();
        let mut seg: Option<usize> = None;
        let mut open: Vec<(Delim, usize)> = Vec::new();
        let mut last_paren_open: Option<usize> = None;

        while *i < n {
            let idx = *i;
            let t = self.toks[idx];

            if self.lang != Language::Java
                && t.nl_before
                && open.is_empty()
                && seg.is_some()
                && self.completes(idx - 1)
                && !self.continues(idx)
            {
                self.flush(seg.take(), idx - 1, scope);
            }

            if seg.is_none() && open.is_empty() {
                if t.is_punct(self.src, "@") && self.word(idx + 1).is_some() {
                    *i = self.skip_annotation(idx);
                    continue;
                }
                if let Some(w) = self.word(idx) {
                    let skip = match w {
                        "else" | "do" | "finally" => true,
                        "try" => !self.punct(idx + 1, "("),
                        _ => false,
                    };
                    if skip {
                        *i += 1;
                        continue;
                    }
                }
            }

            if t.kind != TokKind::Punct {
                seg.get_or_insert(idx);
                *i += 1;
                continue;
            }

            match t.text(self.src) {
                ";" if open.is_empty() => {
                    if let Some(s) = seg.take() {
                        if idx > s {
                            self.flush(Some(s), idx - 1, scope);
                        }
                    }
                }
                ":" if open.is_empty()
                    && seg.is_some_and(|s| matches!(self.word(s), Some("case" | "default"))) =>
                {
                    seg = None;
                }
                "(" => {
                    seg.get_or_insert(idx);
                    open.push((Delim::Paren, idx));
                }
                "[" => {
                    seg.get_or_insert(idx);
                    open.push((Delim::Bracket, idx));
                }
                ")" | "]" => {
                    seg.get_or_insert(idx);
                    let want = if t.text(self.src) == ")" { Delim::Paren } else { Delim::Bracket };
                    if let Some(pos) = open.iter().rposition(|(d, _)| *d == want) {
                        let (_, open_idx) = open[pos];
                        open.truncate(pos);
                        if want == Delim::Paren {
                            last_paren_open = Some(open_idx);
                            if open.is_empty() {
                                if let Some(s) = seg {
                                    if self.is_header(s, open_idx) {
                                        if matches!(self.word(s), Some("if" | "while" | "switch"))
                                            && open_idx + 1 < idx
                                        {
                                            self.flush(Some(open_idx + 1), idx - 1, scope);
                                        }
                                        seg = None;
                                    }
                                }
                            }
                        }
                    }
                }
                "{" => {
                    if open.is_empty() {
                        self.open_brace_at_statement_level(i, &mut seg, &mut open, scope);
                        continue;
                    }
                    let prev_arrow = idx > 0 && matches!(self.text(idx - 1), "=>" | "->");
                    let prev_call = idx > 0
                        && self.punct(idx - 1, ")")
                        && last_paren_open
                            .and_then(|o| o.checked_sub(1))
                            .and_then(|b| self.word(b))
                            .is_some_and(|w| w == "function" || !HEADER_WORDS.contains(&w));
                    if prev_arrow || prev_call {
                        if let Some(s) = seg.take() {
                            if idx > s {
                                self.flush(Some(s), idx - 1, scope);
                            }
                        }
                        self.function_body(i);
                        continue;
                    }
                    seg.get_or_insert(idx);
                    open.push((Delim::Brace, idx));
                }
                "}" => {
                    if let Some(pos) = open.iter().rposition(|(d, _)| *d == Delim::Brace) {
                        seg.get_or_insert(idx);
                        open.truncate(pos);
                    } else {
                        if let Some(s) = seg.take() {
                            if idx > s {
                                self.flush(Some(s), idx - 1, scope);
                            }
                        }
                        open.clear();
                        *i += 1;
                        if top {
                            continue;
                        }
                        return;
                    }
                }
                _ => {
                    seg.get_or_insert(idx);
                }
            }
            *i += 1;
        }
        if let Some(s) = seg {
            if n > s {
                self.flush(Some(s), n - 1, scope);
            }
        }
    }

    /// `seg` starts with a control keyword whose header group opens at `open_idx`.
    fn is_header(&self, seg: usize, open_idx: usize) -> bool {
        let Some(w) = self.word(seg) else {
            return false;
        };
        if !HEADER_WORDS.contains(&w) {
            return false;
        }
        open_idx == seg + 1 || (w == "for" && open_idx == seg + 2 && self.word(seg + 1) == Some("await"))
    }

    fn function_body(&mut self, i: &mut usize) {
        let scope = self.next_scope;
        self.next_scope += 1;
        *i += 1;
        self.block(i, scope, false);
    }

    fn open_brace_at_statement_level(
        &mut self,
        i: &mut usize,
        seg: &mut Option<usize>,
        open: &mut Vec<(Delim, usize)>,
        scope: u32,
    ) {
        let idx = *i;
        let Some(s) = *seg else {
            // Bare block.
            *i += 1;
            self.block(i, scope, false);
            return;
        };
        let head = s..idx;
        let view = self.view();
        let top_level = view.top_level_indices(head.clone());
        let first = head
            .clone()
            .find(|&k| !self.word(k).is_some_and(|w| LEADING_WORDS.contains(&w)));

        if head.len() == 1 && self.word(s) == Some("static") {
            *seg = None;
            *i += 1;
            self.block(i, scope, false);
            return;
        }

        let declares_type = top_level.iter().any(|&k| {
            matches!(
                self.word(k),
                Some("class" | "interface" | "enum" | "record" | "namespace" | "module")
            ) && !(k > 0 && self.punct(k - 1, "."))
        });
        if declares_type {
            *seg = None;
            *i += 1;
            self.block(i, scope, false);
            return;
        }

        let last = idx - 1;
        if matches!(self.text(last), "=>" | "->") {
            self.flush(Some(s), last, scope);
            *seg = None;
            self.function_body(i);
            return;
        }

        let has_function = top_level.iter().any(|&k| self.word(k) == Some("function"));
        if has_function {
            let declaration = first.is_some_and(|f| self.word(f) == Some("function"));
            if !declaration {
                self.flush(Some(s), last, scope);
            }
            *seg = None;
            self.function_body(i);
            return;
        }

        let has_paren = top_level.iter().any(|&k| self.punct(k, "("));
        let has_assign = top_level
            .iter()
            .any(|&k| self.toks[k].kind == TokKind::Punct && ASSIGN_OPS.contains(&self.text(k)));
        let starts_expression = first.map_or(true, |f| {
            matches!(
                self.word(f),
                Some("return" | "new" | "throw" | "await" | "yield" | "typeof" | "case")
            ) || self.toks[f].kind != TokKind::Ident
        });
        let leading_expression = self.word(s).is_some_and(|w| {
            matches!(w, "return" | "throw" | "await" | "yield")
        });
        if has_paren && !has_assign && !starts_expression && !leading_expression {
            // Method or constructor declaration.
            *seg = None;
            self.function_body(i);
            return;
        }

        open.push((Delim::Brace, idx));
        *i += 1;
    }

    fn span(&self, start: usize, end: usize) -> Span {
        let (start_line, start_col) = self.lines.position(self.src, start);
        let (end_line, end_col) = self.lines.position(self.src, end);
        Span {
            start_byte: start,
            end_byte: end,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    fn flush(&mut self, start: Option<usize>, end: usize, scope: u32) {
        let Some(start) = start else {
            return;
        };
        if end < start || end >= self.toks.len() {
            return;
        }
        let first = self.toks[start];
        if first.kind == TokKind::Punct
            && matches!(first.text(self.src), ")" | "]" | "}" | "," | "." | "?." | ";" | "=>" | "->" | ":")
        {
            return;
        }
        let view = self.view();
        let (kind, call) = view.classify_statement(start, end + 1);
        let byte_start = first.start;
        let byte_end = self.toks[end].end;
        self.out.push(Statement {
            file: self.path.to_string(),
            span: self.span(byte_start, byte_end),
            text: self.src[byte_start..byte_end].to_string(),
            kind,
            call,
            scope_id: scope,
        });
    }
}

/// Read-only helpers over a token slice.
#[derive(Clone, Copy)]
struct TokView<'a> {
    src: &'a str,
    toks: &'a [Token],
}

struct Chain {
    segs: Vec<String>,
    this_head: bool,
    /// (index into `segs` of the callee, open paren, close paren)
    calls: Vec<(usize, usize, usize)>,
    end: usize,
}

impl<'a> TokView<'a> {
    fn text(&self, i: usize) -> &'a str {
        self.toks[i].text(self.src)
    }

    fn punct(&self, i: usize, p: &str) -> bool {
        self.toks.get(i).is_some_and(|t| t.is_punct(self.src, p))
    }

    fn ident(&self, i: usize, end: usize) -> Option<&'a str> {
        if i >= end {
            return None;
        }
        self.toks
            .get(i)
            .filter(|t| t.kind == TokKind::Ident)
            .map(|t| t.text(self.src))
    }

    /// Index of the token closing the group opened at `open`.
    fn matching(&self, open: usize) -> Option<usize> {
        let (o, c) = match self.text(open) {
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            "{" => ("{", "}"),
            _ => return None,
        };
        let mut depth = 0usize;
        for k in open..self.toks.len() {
            let t = &self.toks[k];
            if t.kind != TokKind::Punct {
                continue;
            }
            let s = t.text(self.src);
            if s == o {
                depth += 1;
            } else if s == c {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
        }
        None
    }

    /// Indices in `range` at nesting depth zero.
    fn top_level_indices(&self, range: std::ops::Range<usize>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        for k in range {
            let t = &self.toks[k];
            let s = t.text(self.src);
            if t.kind == TokKind::Punct && matches!(s, ")" | "]" | "}") {
                depth -= 1;
                continue;
            }
            if depth <= 0 {
                out.push(k);
            }
            if t.kind == TokKind::Punct && matches!(s, "(" | "[" | "{") {
                depth += 1;
            }
        }
        out
    }

    /// Skips `<...>` type arguments if a call paren follows; returns the
    /// index of that paren.
    fn skip_type_args(&self, lt: usize, end: usize) -> Option<usize> {
        let mut depth = 0i32;
        for k in lt..end.min(lt + 32) {
            let t = &self.toks[k];
            match t.text(self.src) {
                "<" => depth += 1,
                ">" => {
                    depth -= 1;
                    if depth == 0 {
                        return self.punct(k + 1, "(").then_some(k + 1);
                    }
                }
                "," | "." | "[" | "]" | "?" | "|" | "&" => {}
                _ if t.kind == TokKind::Ident => {}
                _ => return None,
            }
        }
        None
    }

    /// Parses `ident(.ident | [..] | (..) | <T>(..))*` starting at `start`.
    fn parse_chain(&self, start: usize, end: usize) -> Option<Chain> {
        let head = self.ident(start, end)?;
        let mut chain = Chain {
            segs: Vec::new(),
            this_head: false,
            calls: Vec::new(),
            end: start + 1,
        };
        if head == "this" || head == "super" {
            chain.this_head = true;
        } else if is_keyword(head) {
            return None;
        } else {
            chain.segs.push(head.to_string());
        }
        let mut q = start + 1;
        loop {
            if q >= end {
                break;
            }
            let t = self.text(q);
            match t {
                "." | "?." => match self.ident(q + 1, end) {
                    Some(name) => {
                        chain.segs.push(name.to_string());
                        q += 2;
                    }
                    None => break,
                },
                "!" if self.punct(q + 1, ".") => q += 1,
                "(" => {
                    let Some(close) = self.matching(q).filter(|&c| c < end) else {
                        break;
                    };
                    if chain.segs.is_empty() {
                        break;
                    }
                    chain.calls.push((chain.segs.len() - 1, q, close));
                    q = close + 1;
                }
                "[" => {
                    let Some(close) = self.matching(q).filter(|&c| c < end) else {
                        break;
                    };
                    q = close + 1;
                }
                "<" if !chain.segs.is_empty() => match self.skip_type_args(q, end) {
                    Some(paren) => q = paren,
                    None => break,
                },
                _ => break,
            }
        }
        chain.end = q;
        if chain.segs.is_empty() && chain.calls.is_empty() {
            // Bare `this`.
            return Some(chain);
        }
        Some(chain)
    }

    fn is_chain_start(&self, k: usize, start: usize) -> bool {
        let t = &self.toks[k];
        if t.kind != TokKind::Ident {
            return false;
        }
        let w = t.text(self.src);
        if is_keyword(w) && w != "this" && w != "super" {
            return false;
        }
        !(k > start && matches!(self.text(k - 1), "." | "?."))
    }

    fn build_call(&self, chain: &Chain, which: usize, depth: usize) -> CallExpr {
        let (seg_idx, open, close) = chain.calls[which];
        let receiver = chain.segs[..seg_idx].to_vec();
        let callee = chain.segs[seg_idx].clone();
        let mut callee_text = String::new();
        if chain.this_head {
            callee_text.push_str("this.");
        }
        for r in &receiver {
            callee_text.push_str(r);
            callee_text.push('.');
        }
        callee_text.push_str(&callee);
        let args = self.split_args(open + 1, close);
        let mut nested = Vec::new();
        for k in 0..which {
            nested.push(self.build_call(chain, k, depth + 1));
        }
        for range in &args {
            nested.extend(self.calls_in(range.clone(), depth + 1));
        }
        CallExpr {
            receiver,
            callee,
            callee_text,
            args: args.into_iter().map(|r| self.build_arg(r)).collect(),
            nested,
            depth,
        }
    }

    fn split_args(&self, start: usize, end: usize) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut from = start;
        for k in self.top_level_indices(start..end) {
            if self.punct(k, ",") {
                if k > from {
                    out.push(from..k);
                }
                from = k + 1;
            }
        }
        if end > from {
            out.push(from..end);
        }
        out
    }

    /// Top-level calls anywhere in `range` (each carrying its own nesting).
    fn calls_in(&self, range: std::ops::Range<usize>, depth: usize) -> Vec<CallExpr> {
        let mut out = Vec::new();
        let mut k = range.start;
        while k < range.end {
            if self.is_chain_start(k, range.start) {
                if let Some(chain) = self.parse_chain(k, range.end) {
                    if !chain.calls.is_empty() {
                        out.push(self.build_call(&chain, chain.calls.len() - 1, depth));
                        k = chain.end.max(k + 1);
                        continue;
                    }
                    k = chain.end.max(k + 1);
                    continue;
                }
            }
            k += 1;
        }
        out
    }

    fn idents_in(&self, range: std::ops::Range<usize>) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut k = range.start;
        while k < range.end {
            if !self.is_chain_start(k, range.start) {
                k += 1;
                continue;
            }
            // Plain access prefix only; calls are descended into by the scan.
            let mut segs = Vec::new();
            let mut q = k;
            let w = self.text(q);
            if w != "this" && w != "super" {
                segs.push(w.to_string());
            }
            q += 1;
            while q + 1 < range.end
                && matches!(self.text(q), "." | "?.")
                && self.ident(q + 1, range.end).is_some()
            {
                segs.push(self.text(q + 1).to_string());
                q += 2;
            }
            if self.punct(q, "(") || (self.punct(q, "<") && self.skip_type_args(q, range.end).is_some()) {
                segs.pop();
            }
            if !segs.is_empty() {
                out.push(segs);
            }
            k = q;
        }
        out
    }

    fn build_arg(&self, range: std::ops::Range<usize>) -> Arg {
        let text = self.src[self.toks[range.start].start..self.toks[range.end - 1].end].to_string();
        let strings: Vec<String> = range
            .clone()
            .filter(|&k| self.toks[k].kind == TokKind::Str)
            .map(|k| string_content(&self.toks[k], self.src))
            .collect();
        let single = range.len() == 1;
        let first = self.toks[range.start];
        let kind = if single && first.kind == TokKind::Str {
            ArgKind::StringLiteral(string_content(&first, self.src))
        } else if (single && first.kind == TokKind::Number)
            || (range.len() == 2
                && first.is_punct(self.src, "-")
                && self.toks[range.start + 1].kind == TokKind::Number)
        {
            ArgKind::NumberLiteral
        } else {
            match self.parse_chain(range.start, range.end) {
                Some(chain)
                    if chain.end == range.end && chain.calls.is_empty() && !chain.segs.is_empty() =>
                {
                    ArgKind::Identifier(chain.segs)
                }
                _ => ArgKind::Other,
            }
        };
        let idents = match &kind {
            ArgKind::Identifier(chain) => vec![chain.clone()],
            ArgKind::StringLiteral(_) | ArgKind::NumberLiteral => Vec::new(),
            ArgKind::Other => self.idents_in(range),
        };
        Arg {
            kind,
            text,
            idents,
            strings,
        }
    }

    /// The outermost call of an expression: the last link of the first
    /// top-level method chain that contains a call.
    fn outermost_call(&self, start: usize, end: usize) -> Option<CallExpr> {
        let mut k = start;
        let mut first_group: Option<(usize, usize)> = None;
        while k < end {
            let t = &self.toks[k];
            if self.is_chain_start(k, start) {
                if let Some(chain) = self.parse_chain(k, end) {
                    if !chain.calls.is_empty() {
                        return Some(self.build_call(&chain, chain.calls.len() - 1, 0));
                    }
                    k = chain.end.max(k + 1);
                    continue;
                }
            }
            if t.kind == TokKind::Punct && matches!(t.text(self.src), "(" | "[" | "{") {
                match self.matching(k).filter(|&c| c < end) {
                    Some(close) => {
                        if first_group.is_none() && t.text(self.src) == "(" {
                            first_group = Some((k + 1, close));
                        }
                        k = close + 1;
                        continue;
                    }
                    None => return None,
                }
            }
            k += 1;
        }
        let (s, e) = first_group?;
        self.outermost_call(s, e)
    }

    fn classify_statement(&self, start: usize, end: usize) -> (StatementKind, Option<CallExpr>) {
        let mut s = start;
        while s < end
            && self.toks[s].kind == TokKind::Ident
            && LEADING_WORDS.contains(&self.text(s))
        {
            s += 1;
        }
        if s >= end {
            return (StatementKind::Other, None);
        }
        if self.toks[s].kind == TokKind::Ident && OTHER_WORDS.contains(&self.text(s)) {
            return (StatementKind::Other, None);
        }
        let top = self.top_level_indices(s..end);
        let assigns: Vec<usize> = top
            .iter()
            .copied()
            .filter(|&k| self.toks[k].kind == TokKind::Punct && ASSIGN_OPS.contains(&self.text(k)))
            .collect();
        match assigns.as_slice() {
            [] => {
                let call = self.outermost_call(s, end);
                let kind = if call.is_some() {
                    StatementKind::ExpressionCall
                } else {
                    StatementKind::Other
                };
                (kind, call)
            }
            [k] => {
                let k = *k;
                match self.assignment_target(s, k, &top) {
                    Some(target) => (
                        StatementKind::Assignment { target },
                        self.outermost_call(k + 1, end),
                    ),
                    None => (StatementKind::Other, self.outermost_call(k + 1, end)),
                }
            }
            [.., last] => (StatementKind::Other, self.outermost_call(last + 1, end)),
        }
    }

    fn assignment_target(&self, start: usize, assign: usize, top: &[usize]) -> Option<Vec<String>> {
        if assign == start {
            return None;
        }
        if matches!(self.text(start), "{" | "[") {
            return None;
        }
        let lhs_top: Vec<usize> = top.iter().copied().filter(|&k| k < assign).collect();
        if lhs_top.iter().any(|&k| self.punct(k, ",")) {
            return None;
        }
        // TypeScript annotation: `x: Type = ...`
        let mut end = lhs_top
            .iter()
            .copied()
            .find(|&k| self.punct(k, ":"))
            .unwrap_or(assign);
        while end > start && matches!(self.text(end - 1), "!" | "?") {
            end -= 1;
        }
        self.last_chain(start, end)
    }

    /// The access chain ending right before `end`, e.g. the `email` of
    /// `String email` or the `[users, email]` of `users[i].email`.
    fn last_chain(&self, start: usize, end: usize) -> Option<Vec<String>> {
        let mut k = end;
        let mut segs: Vec<String> = Vec::new();
        loop {
            if k <= start {
                break;
            }
            // Collapse index groups.
            while k > start && self.punct(k - 1, "]") {
                let mut depth = 0i32;
                let mut j = k - 1;
                loop {
                    match self.text(j) {
                        "]" => depth += 1,
                        "[" => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    if j == start {
                        return None;
                    }
                    j -= 1;
                }
                k = j;
            }
            let w = self.ident(k.checked_sub(1)?, end)?;
            k -= 1;
            segs.push(w.to_string());
            if k > start + 1
                && matches!(self.text(k - 1), "." | "?.")
                && self.toks[k - 2].kind == TokKind::Ident
            {
                k -= 1;
                continue;
            }
            if k > start + 1 && matches!(self.text(k - 1), "." | "?.") && self.punct(k - 2, "]") {
                k -= 1;
                continue;
            }
            break;
        }
        segs.reverse();
        if matches!(segs.first().map(String::as_str), Some("this" | "super")) {
            segs.remove(0);
        }
        if segs.is_empty() || segs.iter().any(|s| is_keyword(s)) {
            return None;
        }
        Some(segs)
    }
}
