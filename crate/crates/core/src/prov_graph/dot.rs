//! Graphviz rendering.

use std::fmt::Write;

use super::{attr, DepKind, ProvenanceGraph};

const HEADER: &str = "digraph provenance {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n";
const FOOTER: &str = "}\n";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the graph in DOT. Output is a pure function of the graph content.
pub fn export_dot(graph: &ProvenanceGraph) -> String {
    let mut out = String::from(HEADER);
    for e in graph.entities() {
        let label = format!("{}\n{}", e.kind.abbrev(), e.id);
        let style = if e.attrs.contains_key(attr::GENERATED_BY_RULE) {
            ", style=filled, fillcolor=\"palegreen\""
        } else {
            ""
        };
        let _ = writeln!(out, "  {} [shape=ellipse, label={}{}];", quote(e.id.as_str()), quote(&label), style);
    }
    for a in graph.activities() {
        let label = if a.label.is_empty() || a.label == a.id.as_str() {
            a.id.to_string()
        } else {
            format!("{}\n{}", a.id, a.label)
        };
        let style = if a.attrs.contains_key(attr::GENERATED_BY_RULE) {
            ", style=filled, fillcolor=\"palegreen\""
        } else {
            ""
        };
        let _ = writeln!(out, "  {} [shape=box, label={}{}];", quote(a.id.as_str()), quote(&label), style);
    }
    for d in graph.deps() {
        let label = match d.kind {
            DepKind::Used => "used",
            DepKind::WasGeneratedBy => "wasGeneratedBy",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(d.from.as_str()),
            quote(d.to.as_str()),
            quote(label)
        );
    }
    out.push_str(FOOTER);
    out
}
