use std::fmt::Write;

use crate::views::DataTypeTree;

fn label(text: &str, count: usize) -> String {
    let escaped = text.replace('"', "#quot;");
    format!("\"{escaped} ({count})\"")
}

/// `flowchart TD` of root, category, stem and variant nodes. Node ids are
/// positional (`c0`, `c0s1`, `c0s1v2`) so equal trees give equal text.
pub fn emit_mermaid(tree: &DataTypeTree) -> String {
    let mut out = String::from("flowchart TD\n");
    let _ = writeln!(out, "    root[{}]", label("personal data", tree.total));
    for (ci, cat) in tree.categories.iter().enumerate() {
        let cid = format!("c{ci}");
        let name = format!("{} {}", cat.category.abbreviation(), cat.label);
        let _ = writeln!(out, "    root --> {cid}[{}]", label(&name, cat.count));
        for (si, stem) in cat.stems.iter().enumerate() {
            let sid = format!("{cid}s{si}");
            let _ = writeln!(out, "    {cid} --> {sid}[{}]", label(&stem.stem, stem.count));
            for (vi, variant) in stem.variants.iter().enumerate() {
                let vid = format!("{sid}v{vi}");
                let _ = writeln!(out, "    {sid} --> {vid}[{}]", label(&variant.name, variant.count));
            }
        }
    }
    out
}
