//! Graphviz export of the synthesized order as a Hasse diagram.

use std::fmt::Write;

use flowsynth::checker::AnalysisSpec;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Covering edges only, drawn bottom-up; minimal elements share the lowest
/// rank and synthetic elements get dashed borders.
pub fn lattice_dot(spec: &AnalysisSpec) -> String {
    let elements = spec.lattice.elements();
    let covers = spec.lattice.poset().covers();
    let mut out = String::new();
    writeln!(out, "digraph lattice {{").unwrap();
    writeln!(out, "  rankdir=BT;").unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for element in elements {
        let mut label = element.name.clone();
        if !element.members.is_empty() {
            let members: Vec<&str> = element.members.iter().map(|m| m.as_str()).collect();
            label.push_str(&format!("\n{{{}}}", members.join(", ")));
        }
        let style = if element.synthetic { ", style=dashed" } else { "" };
        writeln!(
            out,
            "  {} [label={}{}];",
            quote(&element.name),
            quote(&label).replace('\n', "\\n"),
            style
        )
        .unwrap();
    }
    let minimal: Vec<String> = (0..elements.len())
        .filter(|&i| !covers.iter().any(|&(_, b)| b == i))
        .map(|i| quote(&elements[i].name))
        .collect();
    if !minimal.is_empty() {
        writeln!(out, "  {{ rank=min; {}; }}", minimal.join("; ")).unwrap();
    }
    for (a, b) in covers {
        writeln!(out, "  {} -> {};", quote(&elements[a].name), quote(&elements[b].name)).unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}
