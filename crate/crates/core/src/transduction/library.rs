//! Small transductions over graphs used in tests and examples.

use super::{DefinitionScheme, Transduction};
use crate::graph::{edge_signature, EDGE};
use crate::logic::Formula;

fn f(s: &str) -> Formula {
    s.parse().expect("static formula")
}

fn graph_scheme(delta: &str, phi: &str) -> DefinitionScheme {
    DefinitionScheme {
        output: edge_signature(),
        chi: Formula::True,
        delta: ("x".into(), f(delta)),
        phis: vec![(vec!["x0".into(), "x1".into()], f(phi))],
    }
}

pub fn identity() -> Transduction {
    Transduction::identity(&edge_signature())
}

/// Loop-free edge complement.
pub fn complement() -> Transduction {
    Transduction::new(
        edge_signature(),
        1,
        0,
        graph_scheme("(true)", "(and (not (rel edg x0 x1)) (not (sub x0 x1)))"),
    )
    .expect("complement")
}

/// Keeps the elements with an outgoing edge.
pub fn delta_restriction() -> Transduction {
    Transduction::new(
        edge_signature(),
        1,
        0,
        graph_scheme(
            "(exists y (and (sing y) (rel edg x y)))",
            &format!("(rel {EDGE} x0 x1)"),
        ),
    )
    .expect("restriction")
}

/// Two copies, with an edge from every copy-0 element to its copy-1 twin.
pub fn doubler() -> Transduction {
    Transduction::new(
        edge_signature(),
        2,
        0,
        graph_scheme(
            "(true)",
            "(or (rel edg x0 x1) (and (rel sim x0 x1) (rel copy0 x0) (rel copy1 x1)))",
        ),
    )
    .expect("doubler")
}

/// Adds a clique on a guessed parameter set.
pub fn expander() -> Transduction {
    Transduction::new(
        edge_signature(),
        1,
        1,
        graph_scheme(
            "(true)",
            "(or (rel edg x0 x1) (and (rel param0 x0) (rel param0 x1) (not (sub x0 x1))))",
        ),
    )
    .expect("expander")
}

/// The five fixed graph transductions with their names.
pub fn named() -> Vec<(&'static str, Transduction)> {
    vec![
        ("identity", identity()),
        ("complement", complement()),
        ("restriction", delta_restriction()),
        ("doubler", doubler()),
        ("expander", expander()),
    ]
}

pub fn fixed() -> Vec<Transduction> {
    named().into_iter().map(|(_, t)| t).collect()
}
