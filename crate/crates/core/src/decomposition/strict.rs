//! μ, up-sets, strictness and strictification.

use std::collections::BTreeSet;

use super::TreeDecomposition;
use crate::error::Result;
use crate::graph::Graph;
use crate::structure::Structure;
use crate::tree::seq_string;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrictViolation {
    /// No element first appears at this vertex.
    NoNewElement { node: String },
    /// The up-set of a non-root vertex induces a disconnected subgraph.
    DisconnectedUpSet { node: String, components: usize },
}

impl std::fmt::Display for StrictViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrictViolation::NoNewElement { node } => write!(f, "vertex {node:?} introduces no element"),
            StrictViolation::DisconnectedUpSet { node, components } => {
                write!(f, "up-set of {node:?} has {components} components")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictnessReport {
    /// μ(a): the ⪯-least tree vertex whose bag contains a.
    pub mu: Vec<usize>,
    /// U_↑v = {a : v ⪯ μ(a)} per tree vertex.
    pub up: Vec<BTreeSet<usize>>,
    pub violations: Vec<StrictViolation>,
}

impl StrictnessReport {
    pub fn is_strict(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Connected components of the subgraph induced by `set`, ordered by least member.
pub(crate) fn induced_components(g: &Graph, set: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in set {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if set.contains(&w) && seen.insert(w) {
                    comp.insert(w);
                    stack.push(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

impl TreeDecomposition {
    /// μ per element. Errors on invalid decompositions.
    pub fn mu(&self, s: &Structure) -> Result<Vec<usize>> {
        self.require_valid(s)?;
        Ok(self.mu_unchecked(s.len()))
    }

    fn mu_unchecked(&self, n: usize) -> Vec<usize> {
        // ancestors precede descendants in lexicographic order
        let mut mu = vec![usize::MAX; n];
        for (v, bag) in self.bags.iter().enumerate() {
            for &a in bag {
                if mu[a] == usize::MAX {
                    mu[a] = v;
                }
            }
        }
        mu
    }

    pub fn strictness(&self, s: &Structure) -> Result<StrictnessReport> {
        self.require_valid(s)?;
        let mu = self.mu_unchecked(s.len());
        let g = s.gaifman();
        let t = &self.tree;
        let up: Vec<BTreeSet<usize>> = (0..t.len())
            .map(|v| (0..s.len()).filter(|&a| t.le(v, mu[a])).collect())
            .collect();
        let mut violations = Vec::new();
        for v in 0..t.len() {
            let node = seq_string(t.node(v));
            let fresh = mu.contains(&v);
            // an empty structure has only its empty root bag
            if !fresh && !(v == 0 && s.is_empty()) {
                violations.push(StrictViolation::NoNewElement { node: node.clone() });
            }
            if v != 0 {
                let components = induced_components(&g, &up[v]).len();
                if components != 1 {
                    violations.push(StrictViolation::DisconnectedUpSet { node, components });
                }
            }
        }
        Ok(StrictnessReport { mu, up, violations })
    }

    pub fn is_strict(&self, s: &Structure) -> Result<bool> {
        Ok(self.strictness(s)?.is_strict())
    }

    /// A strict decomposition of no larger width or height. Subtrees are
    /// split along the components of their up-sets level by level; then
    /// vertices introducing no element are contracted into their parents
    /// (an empty root absorbs its first child).
    pub fn strictify(&self, s: &Structure) -> Result<TreeDecomposition> {
        self.require_valid(s)?;
        let g = s.gaifman();
        let mut parents = vec![None];
        let mut bags = vec![self.bags[0].clone()];
        for &c in self.tree.children(0) {
            self.split(&g, c, &BTreeSet::new(), &self.bags[0], 0, &mut parents, &mut bags);
        }
        let mut d = TreeDecomposition::from_parents(&parents, bags)?;
        loop {
            let mu = d.mu_unchecked(s.len());
            let t = &d.tree;
            let mut f: Vec<(usize, usize)> = (1..t.len())
                .filter(|v| !mu.contains(v))
                .map(|v| (t.parent(v).expect("non-root"), v))
                .collect();
            if !mu.contains(&0) && !s.is_empty() && f.iter().all(|&(p, _)| p != 0) {
                if let Some(&c) = t.children(0).first() {
                    f.push((0, c));
                }
            }
            if f.is_empty() {
                return Ok(d);
            }
            d = d.contract(&f)?;
        }
    }

    /// Copies the subtree at `v` once per component of its up-set. In the
    /// copy for component C the elements of the other components are dropped;
    /// elements shared with ancestors stay.
    #[allow(clippy::too_many_arguments)]
    fn split(
        &self,
        g: &Graph,
        v: usize,
        dropped: &BTreeSet<usize>,
        above: &BTreeSet<usize>,
        parent: usize,
        parents: &mut Vec<Option<usize>>,
        bags: &mut Vec<BTreeSet<usize>>,
    ) {
        let below: BTreeSet<usize> = self
            .tree
            .descendants(v)
            .into_iter()
            .flat_map(|u| self.bags[u].iter().copied())
            .filter(|a| !dropped.contains(a))
            .collect();
        let up: BTreeSet<usize> = below.difference(above).copied().collect();
        for comp in induced_components(g, &up) {
            let mut drop = dropped.clone();
            drop.extend(up.difference(&comp));
            let bag: BTreeSet<usize> = self.bags[v].difference(&drop).copied().collect();
            let me = parents.len();
            parents.push(Some(parent));
            bags.push(bag.clone());
            let above_next: BTreeSet<usize> = above.union(&bag).copied().collect();
            for &c in self.tree.children(v) {
                self.split(g, c, &drop, &above_next, me, parents, bags);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{graph_width, WidthMode};
    use crate::tree::TreeDomain;

    fn p4_witness() -> (Graph, TreeDecomposition) {
        let g = Graph::path(3);
        let d = graph_width(&g, WidthMode::Depth(2), 10).unwrap().1;
        (g, d)
    }

    #[test]
    fn mu_of_p4_witness() {
        let (g, d) = p4_witness();
        let r = d.strictness(g.structure()).unwrap();
        assert_eq!(r.mu, vec![1, 0, 0, 2]);
        assert_eq!(r.up[1], BTreeSet::from([0]));
        assert_eq!(r.up[2], BTreeSet::from([3]));
        assert!(r.is_strict());
    }

    #[test]
    fn single_bag_is_strict() {
        let g = Graph::cycle(4);
        let d = TreeDecomposition::trivial(g.structure());
        let r = d.strictness(g.structure()).unwrap();
        assert!(r.mu.iter().all(|&v| v == 0));
        assert_eq!(r.up[0].len(), 4);
        assert!(r.is_strict());
    }

    #[test]
    fn duplicated_child_contracted() {
        let (g, d) = p4_witness();
        let s = g.structure();
        // the copy hangs below the original so that v4 stays connected
        let tree = TreeDomain::from_strings(&["", "0", "1", "10"]).unwrap();
        let mut bags = d.bags().to_vec();
        bags.push(bags[2].clone());
        let dup = TreeDecomposition::new(tree, bags).unwrap();
        assert!(dup.is_valid(s));
        let r = dup.strictness(s).unwrap();
        assert!(r.violations.contains(&StrictViolation::NoNewElement { node: "10".into() }));
        let fixed = dup.strictify(s).unwrap();
        assert!(fixed.is_strict(s).unwrap());
        assert_eq!(fixed.tree().len(), 3);
        assert_eq!(d.strictify(s).unwrap(), d);
    }

    #[test]
    fn disconnected_up_set_split() {
        // P4 with a path-shaped decomposition rooted in the middle bag
        let g = Graph::path(3);
        let s = g.structure();
        let bag = |xs: &[usize]| xs.iter().copied().collect::<BTreeSet<usize>>();
        let d = TreeDecomposition::new(
            TreeDomain::chain(2),
            vec![bag(&[1, 2]), bag(&[0, 1, 2, 3])],
        )
        .unwrap();
        assert!(!d.is_strict(s).unwrap());
        let fixed = d.strictify(s).unwrap();
        assert!(fixed.is_strict(s).unwrap());
        assert_eq!(fixed.tree().children(0).len(), 2);
        assert!(fixed.width() <= d.width());
    }

    #[test]
    fn random_strictify() {
        let mut r = crate::random::rng(3);
        for _ in 0..60 {
            let n = 1 + rand::Rng::gen_range(&mut r, 0..8);
            let g = crate::random::random_graph(&mut r, n, 0.35);
            let d = crate::decomposition::ops::random_decomposition(&mut r, g.structure(), 6);
            assert!(d.is_valid(g.structure()));
            let f = d.strictify(g.structure()).unwrap();
            assert!(f.is_valid(g.structure()));
            assert!(f.is_strict(g.structure()).unwrap(), "{:?}", f);
            assert!(f.width() <= d.width());
            assert!(f.height() <= d.height());
        }
    }
}
