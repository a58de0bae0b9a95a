//! Random scopes and corpora for the acceptance checks.

use pdflow_core::stmt::Language;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::oracle::{GenArg, GenKind, GenStmt};

const IDENTS: &[&str] = &[
    "email", "email_addr", "users.email", "full_name", "first_name", "name", "surgeon_name", "userName", "user_detail",
    "UserInfo", "AccountInfo", "userId", "SSN", "password", "ip_address", "city", "phone", "isFemale", "record_data",
    "user.organizationUsers", "choice", "tmp", "result", "items", "index", "list", "data", "this.repo", "config.value",
    "loginCount", "message", "stage", "catalog", "dialogTitle",
];
const TARGETS: &[&str] = &[
    "choice", "result", "tmp", "full_name", "isFemale", "UserInfo", "query", "this.cache", "user.email", "total",
    "first_name", "out",
];
const RECEIVERS: &[&str] = &[
    "UserInfo", "AccountInfo", "this.usersRepository", "console", "db", "api", "email", "choice", "user_detail",
    "this.repo", "result",
];
const CALLEES: &[&str] = &[
    "update", "retrieve", "get", "check", "match", "send", "create", "findOne", "save", "hash", "log", "print",
    "println", "sendData", "createQueryBuilder", "findOrCreateByEmail", "getItem", "validate", "share", "encrypt",
    "login", "logout", "foo", "compute", "render", "dialog", "catalog", "blogPost",
];
const STRINGS: &[&str] = &["a@b.org", "hello", "10.0.0.1", "123-45-6789", "x y", "ops@corp.example"];

fn chain(s: &str) -> Vec<String> {
    s.split('.').map(str::to_string).collect()
}

pub fn stmt(rng: &mut impl Rng) -> GenStmt {
    let kind = match rng.gen_range(0..20) {
        0 => GenKind::Destructure,
        1..=9 => GenKind::Call { target: None },
        _ => GenKind::Call {
            target: Some(chain(TARGETS.choose(rng).unwrap())),
        },
    };
    let receiver = if rng.gen_bool(0.45) { chain(RECEIVERS.choose(rng).unwrap()) } else { Vec::new() };
    let args = (0..rng.gen_range(0..=3))
        .map(|_| match rng.gen_range(0..10) {
            0 => GenArg::Str(STRINGS.choose(rng).unwrap().to_string()),
            1 => GenArg::Num(rng.gen_range(0..100)),
            _ => GenArg::Ident(chain(IDENTS.choose(rng).unwrap())),
        })
        .collect();
    GenStmt {
        kind,
        receiver,
        callee: CALLEES.choose(rng).unwrap().to_string(),
        args,
    }
}

pub fn render_stmt(s: &GenStmt, lang: Language, declare: bool) -> String {
    let args: Vec<String> = s
        .args
        .iter()
        .map(|a| match a {
            GenArg::Ident(c) => c.join("."),
            GenArg::Str(v) => format!("\"{v}\""),
            GenArg::Num(n) => n.to_string(),
        })
        .collect();
    let mut call = String::new();
    if !s.receiver.is_empty() {
        call.push_str(&s.receiver.join("."));
        call.push('.');
    }
    call.push_str(&format!("{}({})", s.callee, args.join(", ")));
    match &s.kind {
        GenKind::Destructure => match lang {
            Language::Java => format!("a = b = {call};"),
            _ => format!("const {{ a, b }} = {call};"),
        },
        GenKind::Call { target: None } => format!("{call};"),
        GenKind::Call { target: Some(t) } => {
            let decl = match lang {
                _ if !declare || t.len() > 1 => "",
                Language::Java => "var ",
                Language::JavaScript => "let ",
                Language::TypeScript => "const ",
            };
            format!("{decl}{} = {call};", t.join("."))
        }
    }
}

/// A source file holding `scopes` as separate functions, plus the line of
/// each statement.
pub fn render_file(scopes: &[Vec<GenStmt>], lang: Language, rng: &mut impl Rng) -> (String, Vec<Vec<usize>>) {
    let mut out = String::new();
    let mut lines = Vec::new();
    let mut line = 1;
    let push = |out: &mut String, text: &str, line: &mut usize| {
        out.push_str(text);
        out.push('\n');
        *line += 1;
    };
    if lang == Language::Java {
        push(&mut out, "class Generated {", &mut line);
    }
    for (i, scope) in scopes.iter().enumerate() {
        let header = match lang {
            Language::Java => format!("  void f{i}() {{"),
            Language::JavaScript => format!("function f{i}() {{"),
            Language::TypeScript => format!("function f{i}(): void {{"),
        };
        push(&mut out, &header, &mut line);
        let mut scope_lines = Vec::new();
        for s in scope {
            scope_lines.push(line);
            let text = format!("    {}", render_stmt(s, lang, rng.gen_bool(0.5)));
            push(&mut out, &text, &mut line);
        }
        lines.push(scope_lines);
        push(&mut out, if lang == Language::Java { "  }" } else { "}" }, &mut line);
    }
    if lang == Language::Java {
        push(&mut out, "}", &mut line);
    }
    (out, lines)
}

/// Roughly `lines` lines of mixed code: generated statements inside
/// functions, with comments, conditionals and plain assignments between.
pub fn corpus_file(lang: Language, lines: usize, rng: &mut impl Rng) -> String {
    let mut out = String::new();
    let mut n = 0;
    if lang == Language::Java {
        out.push_str("package gen;\n\nclass Corpus {\n");
        n += 3;
    }
    let mut f = 0;
    while n < lines {
        let header = match lang {
            Language::Java => format!("  void m{f}(String arg) {{\n"),
            Language::JavaScript => format!("async function m{f}(arg) {{\n"),
            Language::TypeScript => format!("export function m{f}(arg: string): void {{\n"),
        };
        out.push_str(&header);
        n += 1;
        for _ in 0..rng.gen_range(3..12) {
            match rng.gen_range(0..8) {
                0 => out.push_str("    // handles the personal data of the current user\n"),
                1 => {
                    let s = stmt(rng);
                    out.push_str(&format!("    if (arg != null) {{\n      {}\n    }}\n", render_stmt(&s, lang, false)));
                    n += 2;
                }
                2 => out.push_str(&format!("    tmp{f} = {};\n", IDENTS.choose(rng).unwrap())),
                _ => out.push_str(&format!("    {}\n", render_stmt(&stmt(rng), lang, rng.gen_bool(0.3)))),
            }
            n += 1;
        }
        out.push_str(if lang == Language::Java { "  }\n\n" } else { "}\n\n" });
        n += 2;
        f += 1;
    }
    if lang == Language::Java {
        out.push_str("}\n");
    }
    out
}
