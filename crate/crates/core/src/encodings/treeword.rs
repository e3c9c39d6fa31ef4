//! Trees of bounded height as words: the level sequence in lexicographic order.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{edge_signature, EDGE};
use crate::logic::Formula;
use crate::structure::Structure;
use crate::transduction::{param_symbol, DefinitionScheme, Transduction};
use crate::tree::{ColouredTree, TreeDomain, TreeMode};

/// The levels of the vertices of `t` in lexicographic order; labels lie in `[n]`.
pub fn tree_word_encode(t: &TreeDomain, n: usize) -> Result<Vec<usize>> {
    if t.height() > n {
        return Err(Error::Argument(format!("tree has height {}, alphabet has {n} letters", t.height())));
    }
    Ok((0..t.len()).map(|v| t.level(v)).collect())
}

/// Predecessor of position i: the last earlier position with a smaller label.
pub fn tree_word_parents(w: &[usize]) -> Result<Vec<Option<usize>>> {
    match w.first() {
        None => return Err(Error::Format("empty word".into())),
        Some(&l) if l != 0 => return Err(Error::Format(format!("word starts with {l}, not 0"))),
        _ => {}
    }
    let mut parents = vec![None];
    for i in 1..w.len() {
        let p = (0..i)
            .rev()
            .find(|&j| w[j] < w[i])
            .ok_or_else(|| Error::Format(format!("position {i} (label {}) has no smaller label before it", w[i])))?;
        parents.push(Some(p));
    }
    Ok(parents)
}

pub fn tree_word_decode(w: &[usize]) -> Result<TreeDomain> {
    Ok(TreeDomain::from_parents(&tree_word_parents(w)?)?.0)
}

pub fn parse_word(text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Format(format!("bad label {t:?}"))))
        .collect()
}

pub fn format_word(w: &[usize]) -> String {
    w.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// The word as a path `v1 - … - vm` with parameter `param_l` holding the
/// positions labelled `l`, i.e. the input the decoding transduction expects.
pub fn word_parameters(w: &[usize], n: usize) -> Result<Vec<u64>> {
    if w.len() > 63 {
        return Err(Error::budget("word length", 63, w.len()));
    }
    if let Some(&l) = w.iter().find(|&&l| l >= n) {
        return Err(Error::Format(format!("label {l} outside [{n}]")));
    }
    Ok((0..n)
        .map(|l| w.iter().enumerate().filter(|&(_, &x)| x == l).fold(0u64, |m, (i, _)| m | 1 << i))
        .collect())
}

fn f(s: &str) -> Formula {
    s.parse().expect("static formula")
}

/// The n-parameter transduction from (undirected or directed) paths to
/// successor trees of height ≤ n. The parameters guess the word; `param0`
/// must be a single endpoint, from which positions are ordered.
pub fn tree_word_transduction(n: usize) -> Transduction {
    assert!(n >= 1, "alphabet must be nonempty");
    let p = |l: usize, x: &str| format!("(rel {} {x})", param_symbol(l));
    let adj = |u: &str, v: &str| format!("(or (rel {EDGE} {u} {v}) (rel {EDGE} {v} {u}))");
    // x ⪯ y: x is the start, x = y, or x separates the start from y
    let le = |x: &str, y: &str| {
        format!(
            "(existsF r (and {pr} (or (sub r {x}) (sub {x} {y}) \
             (exists X (and (sub r X) (not (sub {x} X)) (not (sub {y} X)) \
             (forallF u (forallF v (or (not (sub u X)) (not {adj}) (sub v {x}) (sub v X)))))))))",
            pr = p(0, "r"),
            adj = adj("u", "v"),
        )
    };
    let lt = |x: &str, y: &str| format!("(and {} (not (sub {x} {y})))", le(x, y));
    let smaller = |x: &str, y: &str| {
        let cases: Vec<String> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| format!("(and {} {})", p(i, x), p(j, y)))
            .collect();
        format!("(or {})", cases.join(" "))
    };
    let partition: Vec<String> = std::iter::once(format!(
        "(forallF x (or {}))",
        (0..n).map(|l| p(l, "x")).collect::<Vec<_>>().join(" ")
    ))
    .chain(
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| format!("(forallF x (not (and {} {})))", p(i, "x"), p(j, "x"))),
    )
    .collect();
    let start = format!(
        "(existsF r (and {} (forallF x (or (not {}) (sub x r))) \
         (forallF u (forallF v (or (not (and {} {})) (sub u v))))))",
        p(0, "r"),
        p(0, "x"),
        adj("r", "u"),
        adj("r", "v"),
    );
    let chi = f(&format!("(and {} {start})", partition.join(" ")));
    let phi = f(&format!(
        "(and {lt01} {sm01} (not (existsF z (and {lt0z} {ltz1} {smz1}))))",
        lt01 = lt("x0", "x1"),
        sm01 = smaller("x0", "x1"),
        lt0z = lt("x0", "z"),
        ltz1 = lt("z", "x1"),
        smz1 = smaller("z", "x1"),
    ));
    let scheme = DefinitionScheme {
        output: ColouredTree::signature(TreeMode::Successor, 0),
        chi,
        delta: ("x".into(), Formula::True),
        phis: vec![(vec!["x0".into(), "x1".into()], phi)],
    };
    Transduction::new(edge_signature(), 1, n, scheme).expect("tree word scheme")
}

/// The successor structure of the decoded tree with element `i` named after
/// path vertex `i`, for comparison with the transduction output.
pub fn decoded_structure(w: &[usize], path: &Structure) -> Result<Structure> {
    let parents = tree_word_parents(w)?;
    if path.len() != w.len() {
        return Err(Error::Argument("word and path differ in length".into()));
    }
    let edges: BTreeSet<Vec<usize>> = parents
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| vec![p, i]))
        .collect();
    Structure::from_named(
        ColouredTree::signature(TreeMode::Successor, 0),
        path.domain().to_vec(),
        vec![edges],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::iso::{canonical_form, isomorphic};
    use crate::transduction::ApplyOptions;
    use crate::tree::all_trees;

    #[test]
    fn small_words() {
        let one = TreeDomain::chain(1);
        assert_eq!(tree_word_encode(&one, 1).unwrap(), vec![0]);
        let cherry = TreeDomain::from_strings(&["", "0", "1"]).unwrap();
        assert_eq!(tree_word_encode(&cherry, 2).unwrap(), vec![0, 1, 1]);
        assert_eq!(tree_word_encode(&TreeDomain::chain(3), 3).unwrap(), vec![0, 1, 2]);
        assert!(tree_word_encode(&TreeDomain::chain(3), 2).is_err());
        assert_eq!(tree_word_decode(&[0, 1, 1]).unwrap().shape(), cherry.shape());
        assert_eq!(tree_word_decode(&[0]).unwrap().len(), 1);
    }

    #[test]
    fn invalid_words() {
        for w in [&[][..], &[1], &[0, 1, 0], &[0, 2, 2, 0]] {
            assert!(matches!(tree_word_decode(w), Err(Error::Format(_))), "{w:?}");
        }
        // a skipped level still finds a smaller label
        assert_eq!(tree_word_decode(&[0, 2]).unwrap().height(), 2);
        assert_eq!(parse_word("0 1  2").unwrap(), vec![0, 1, 2]);
        assert!(parse_word("0 x").is_err());
    }

    #[test]
    fn exhaustive_roundtrip() {
        for m in 1..=6 {
            for t in all_trees(m) {
                if t.height() > 3 {
                    continue;
                }
                let w = tree_word_encode(&t, 3).unwrap();
                let back = tree_word_decode(&w).unwrap();
                assert_eq!(back, t, "{}", format_word(&w));
            }
        }
    }

    #[test]
    fn transduction_matches_decoder() {
        let t = tree_word_transduction(3);
        let opts = ApplyOptions::default();
        for w in [vec![0], vec![0, 1, 1], vec![0, 1, 2, 1], vec![0, 2, 1, 2, 2]] {
            let path = Graph::path(w.len() - 1);
            let params = word_parameters(&w, 3).unwrap();
            let out = t.apply_with_params(path.structure(), &params, &opts).unwrap().unwrap();
            assert_eq!(out, decoded_structure(&w, path.structure()).unwrap(), "{w:?}");
        }
        // param0 must be a single endpoint
        let path = Graph::path(2);
        let mid = word_parameters(&[1, 0, 1], 3).unwrap();
        assert!(t.apply_with_params(path.structure(), &mid, &opts).unwrap().is_none());
    }

    #[test]
    fn transduction_image_is_all_trees() {
        let t = tree_word_transduction(2);
        let opts = ApplyOptions::default();
        for l in 0..4 {
            let path = Graph::path(l);
            let image: BTreeSet<_> = t
                .apply(path.structure(), &opts)
                .unwrap()
                .iter()
                .map(canonical_form)
                .collect();
            let expected: BTreeSet<_> = all_trees(l + 1)
                .into_iter()
                .filter(|d| d.height() <= 2)
                .map(|d| canonical_form(&ColouredTree::plain(d, TreeMode::Successor).to_structure()))
                .collect();
            assert_eq!(image, expected, "path of length {l}");
        }
        let star = ColouredTree::plain(TreeDomain::complete(3, 2), TreeMode::Successor).to_structure();
        let outs = t.apply(Graph::path(3).structure(), &opts).unwrap();
        assert!(outs.iter().any(|o| isomorphic(o, &star)));
    }

    #[test]
    fn backwards_agrees_with_apply() {
        let t = tree_word_transduction(2);
        let opts = ApplyOptions::default();
        let branching: Formula = "(existsF x (existsF y (existsF z (and (rel edg x y) (rel edg x z) (not (sub y z))))))"
            .parse()
            .unwrap();
        let back = crate::transduction::backwards(&t, &branching).unwrap();
        for l in 0..4 {
            let path = Graph::path(l);
            let some = t
                .apply(path.structure(), &opts)
                .unwrap()
                .iter()
                .any(|b| crate::logic::holds(b, &branching).unwrap());
            assert_eq!(crate::logic::holds(path.structure(), &back).unwrap(), some, "length {l}");
            assert_eq!(some, l >= 2);
        }
    }
}
