//! Graphviz output.

use std::fmt::Write;

use crate::graph::Graph;
use crate::tree::{seq_string, TreeDomain};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn graph_dot(g: &Graph) -> String {
    let (kw, arrow) = if g.is_directed() { ("digraph", "->") } else { ("graph", "--") };
    let mut out = format!("{kw} G {{\n");
    for v in 0..g.vertex_count() {
        let _ = writeln!(out, "  {};", quote(g.name(v)));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  {} {arrow} {};", quote(g.name(u)), quote(g.name(v)));
    }
    out.push_str("}\n");
    out
}

/// A tree with an optional label per vertex.
pub fn tree_dot(t: &TreeDomain, label: impl Fn(usize) -> String) -> String {
    let mut out = String::from("digraph T {\n  node [shape=box];\n");
    for v in 0..t.len() {
        let id = quote(&format!("t{}", seq_string(t.node(v))));
        let _ = writeln!(out, "  {id} [label={}];", quote(&label(v)));
        if let Some(p) = t.parent(v) {
            let _ = writeln!(out, "  {} -> {id};", quote(&format!("t{}", seq_string(t.node(p)))));
        }
    }
    out.push_str("}\n");
    out
}
