//! Minor containment by branch-set search, and exhaustive minor closure.

use std::collections::{BTreeMap, HashSet};

use crate::error::{check_budget, Result};
use crate::graph::Graph;
use crate::iso::{canonical_form, CanonicalForm};

pub const DEFAULT_MINOR_BUDGET: usize = 10;

/// Searches branch sets `B_h ⊆ V(G)` (disjoint, connected, nonempty) such that
/// every edge `hh'` of `H` is realised between `B_h` and `B_h'`.
pub fn find_minor(h: &Graph, g: &Graph, budget: usize) -> Result<Option<Vec<Vec<usize>>>> {
    check_budget("host vertices for minor search", budget, g.vertex_count())?;
    let (hn, gn) = (h.vertex_count(), g.vertex_count());
    if hn > gn || h.edge_count() > g.edge_count() {
        return Ok(None);
    }
    let mut label = vec![usize::MAX; gn];
    let mut sizes = vec![0usize; hn];
    let ok = assign(h, g, 0, &mut label, &mut sizes);
    Ok(ok.then(|| {
        let mut sets = vec![Vec::new(); hn];
        for (v, &l) in label.iter().enumerate() {
            if l != usize::MAX {
                sets[l].push(v);
            }
        }
        sets
    }))
}

pub fn is_minor(h: &Graph, g: &Graph, budget: usize) -> Result<bool> {
    Ok(find_minor(h, g, budget)?.is_some())
}

fn assign(h: &Graph, g: &Graph, v: usize, label: &mut Vec<usize>, sizes: &mut Vec<usize>) -> bool {
    let gn = g.vertex_count();
    let empty = sizes.iter().filter(|&&s| s == 0).count();
    if gn - v < empty {
        return false;
    }
    if v == gn {
        return check(h, g, label);
    }
    // labels of an edgeless H are interchangeable: open branch sets in order
    let first_empty = sizes.iter().position(|&s| s == 0);
    for l in 0..h.vertex_count() {
        if sizes[l] == 0 && Some(l) != first_empty && h.edge_count() == 0 {
            continue;
        }
        label[v] = l;
        sizes[l] += 1;
        if assign(h, g, v + 1, label, sizes) {
            return true;
        }
        sizes[l] -= 1;
    }
    label[v] = usize::MAX;
    assign(h, g, v + 1, label, sizes)
}

fn check(h: &Graph, g: &Graph, label: &[usize]) -> bool {
    let hn = h.vertex_count();
    let mut sets = vec![Vec::new(); hn];
    for (v, &l) in label.iter().enumerate() {
        if l != usize::MAX {
            sets[l].push(v);
        }
    }
    if sets.iter().any(|s| s.is_empty() || !g.induced(s).is_connected()) {
        return false;
    }
    h.edges().into_iter().all(|(a, b)| {
        sets[a]
            .iter()
            .any(|&x| g.neighbors(x).iter().any(|&y| label[y] == b))
    })
}

/// All minors of `g` up to isomorphism, by closing under single vertex
/// deletions, edge deletions and edge contractions. Includes the empty graph.
pub fn all_minors(g: &Graph, budget: usize) -> Result<Vec<Graph>> {
    check_budget("vertices for minor closure", budget, g.vertex_count())?;
    let mut seen: HashSet<CanonicalForm> = HashSet::new();
    let mut found: BTreeMap<CanonicalForm, Graph> = BTreeMap::new();
    let mut stack = vec![g.clone()];
    seen.insert(canonical_form(g.structure()));
    while let Some(x) = stack.pop() {
        let mut next = Vec::new();
        let n = x.vertex_count();
        for v in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            next.push(x.induced(&keep));
        }
        for e in x.edges() {
            next.push(x.without_edges(&[e]));
            next.push(x.contract_edges(&[e]).expect("edge"));
        }
        for y in next {
            let c = canonical_form(y.structure());
            if seen.insert(c) {
                stack.push(y);
            }
        }
        found.insert(canonical_form(x.structure()), x);
    }
    Ok(found.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forests_have_no_triangle_minor() {
        let k3 = Graph::complete(3);
        assert!(!is_minor(&k3, &Graph::path(5), 10).unwrap());
        assert!(is_minor(&k3, &Graph::cycle(5), 10).unwrap());
    }

    #[test]
    fn path_in_grid() {
        let sets = find_minor(&Graph::path(3), &Graph::grid(2, 3), 10).unwrap().unwrap();
        assert_eq!(sets.len(), 4);
    }

    #[test]
    fn reflexive() {
        let g = Graph::grid(2, 3);
        let sets = find_minor(&g, &g, 10).unwrap().unwrap();
        assert!(sets.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn budget_enforced() {
        assert!(find_minor(&Graph::path(1), &Graph::path(12), 10).is_err());
    }

    #[test]
    fn minors_of_path3() {
        // empty, P1..P4 as paths, and disjoint unions of paths with at most 4 vertices
        let m = all_minors(&Graph::path(3), 10).unwrap();
        assert_eq!(m.len(), 12);
    }

    #[test]
    fn minors_of_k4_contain_k3() {
        let m = all_minors(&Graph::complete(4), 10).unwrap();
        assert!(m.iter().any(|x| crate::iso::isomorphic(x.structure(), Graph::complete(3).structure())));
    }
}
