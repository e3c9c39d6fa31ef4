//! Recovering a strict decomposition from its level sets
//! `L_i = {a : |μ(a)| = i}`.

use std::collections::BTreeSet;

use super::strict::induced_components;
use super::TreeDecomposition;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::structure::Structure;
use crate::tree::TreeDomain;

/// The level sets of a decomposition.
pub fn levels_of(d: &TreeDecomposition, s: &Structure) -> Result<Vec<BTreeSet<usize>>> {
    let mu = d.mu(s)?;
    let mut levels = vec![BTreeSet::new(); d.height().max(1)];
    for (a, &v) in mu.iter().enumerate() {
        levels[d.tree().level(v)].insert(a);
    }
    Ok(levels)
}

/// The preorder `a ⪯ b` iff `level(a) ≤ level(b)` and both lie in one
/// component of `G[L_level(a) ∪ … ∪ L_{n−1}]`. Elements of `L_0` form the
/// root class and precede everything.
#[derive(Clone, Debug)]
pub struct LevelOrder {
    level: Vec<usize>,
    /// `comp[i][a]`: component id of `a` in `G[L_≥i]` (`usize::MAX` below level i).
    comp: Vec<Vec<usize>>,
}

impl LevelOrder {
    pub fn level(&self, a: usize) -> usize {
        self.level[a]
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        let i = self.level[a];
        i == 0 || (i <= self.level[b] && self.comp[i][a] == self.comp[i][b])
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.le(a, b) && self.le(b, a)
    }
}

pub fn level_order(s: &Structure, levels: &[BTreeSet<usize>]) -> Result<LevelOrder> {
    let n = s.len();
    let mut level = vec![usize::MAX; n];
    for (i, l) in levels.iter().enumerate() {
        for &a in l {
            if a >= n {
                return Err(Error::Argument(format!("level {i} holds unknown element #{a}")));
            }
            if level[a] != usize::MAX {
                return Err(Error::Argument(format!(
                    "{} lies in levels {} and {i}",
                    s.element(a),
                    level[a]
                )));
            }
            level[a] = i;
        }
    }
    if let Some(a) = level.iter().position(|&l| l == usize::MAX) {
        return Err(Error::Argument(format!("{} lies in no level", s.element(a))));
    }
    let g = s.gaifman();
    let comp = (0..levels.len())
        .map(|i| {
            let upper: BTreeSet<usize> = (0..n).filter(|&a| level[a] >= i).collect();
            let mut ids = vec![usize::MAX; n];
            for (c, members) in induced_components(&g, &upper).into_iter().enumerate() {
                for a in members {
                    ids[a] = c;
                }
            }
            ids
        })
        .collect();
    Ok(LevelOrder { level, comp })
}

/// A tree with one vertex per ∼-class (all of `L_0` is the root) ordered by
/// the level order, plus the induced strict decomposition.
#[derive(Clone, Debug)]
pub struct ExtractedTree {
    pub tree: TreeDomain,
    /// Tree vertex of each element's class.
    pub node_of: Vec<usize>,
    pub decomposition: TreeDecomposition,
}

pub fn extract_tree(s: &Structure, levels: &[BTreeSet<usize>]) -> Result<ExtractedTree> {
    let order = level_order(s, levels)?;
    let n = s.len();
    if levels.first().map_or(true, |l| l.is_empty()) && n > 0 {
        return Err(Error::Structural("level 0 is empty, so the root introduces no element".into()));
    }
    // classes: root first, then by level and least member
    let mut class_of = vec![0usize; n];
    let mut reps: Vec<usize> = vec![usize::MAX];
    let mut members: Vec<Vec<usize>> = vec![levels.first().map(|l| l.iter().copied().collect()).unwrap_or_default()];
    for l in levels.iter().skip(1) {
        for &a in l {
            match reps.iter().skip(1).position(|&r| order.equivalent(r, a)) {
                Some(c) => {
                    class_of[a] = c + 1;
                    members[c + 1].push(a);
                }
                None => {
                    class_of[a] = reps.len();
                    reps.push(a);
                    members.push(vec![a]);
                }
            }
        }
    }
    let name = |c: usize| -> String {
        let names: Vec<&str> = members[c].iter().map(|&a| s.element(a)).collect();
        format!("{{{}}}", names.join(","))
    };
    let mut parents = vec![None; reps.len()];
    for c in 1..reps.len() {
        let lc = order.level(reps[c]);
        // the ⪯-greatest strict predecessor; predecessors always form a chain
        let parent = (1..reps.len())
            .filter(|&d| d != c && order.le(reps[d], reps[c]) && !order.le(reps[c], reps[d]))
            .max_by_key(|&d| order.level(reps[d]))
            .unwrap_or(0);
        let lp = if parent == 0 { 0 } else { order.level(reps[parent]) };
        if lp + 1 != lc {
            return Err(Error::Structural(format!(
                "class {} at level {lc} sits directly below class {} at level {lp}",
                name(c),
                name(parent)
            )));
        }
        parents[c] = Some(parent);
    }
    let (tree, map) = TreeDomain::from_parents(&parents)?;
    let node_of: Vec<usize> = class_of.iter().map(|&c| map[c]).collect();
    let g = s.gaifman();
    let decomposition = canonical_bags(&g, &tree, &node_of)?;
    Ok(ExtractedTree {
        tree,
        node_of,
        decomposition,
    })
}

/// `U_v = μ⁻¹(v) ∪ {a : μ(a) ≺ v, a adjacent to U_↑v}`.
fn canonical_bags(g: &Graph, tree: &TreeDomain, mu: &[usize]) -> Result<TreeDecomposition> {
    let n = mu.len();
    let bags = (0..tree.len())
        .map(|v| {
            let up: BTreeSet<usize> = (0..n).filter(|&a| tree.le(v, mu[a])).collect();
            (0..n)
                .filter(|&a| {
                    mu[a] == v
                        || (tree.le(mu[a], v)
                            && mu[a] != v
                            && g.neighbors(a).iter().any(|b| up.contains(b)))
                })
                .collect()
        })
        .collect();
    TreeDecomposition::new(tree.clone(), bags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{graph_width, WidthMode};

    #[test]
    fn p4_levels() {
        let g = Graph::path(3);
        let s = g.structure();
        let d = graph_width(&g, WidthMode::Depth(2), 10).unwrap().1;
        let levels = levels_of(&d, s).unwrap();
        let o = level_order(s, &levels).unwrap();
        assert!(!o.le(0, 3) && !o.le(3, 0));
        assert!(o.equivalent(1, 2));
        let e = extract_tree(s, &levels).unwrap();
        assert_eq!(e.tree.shape(), d.tree().shape());
        assert!(e.decomposition.is_valid(s));
        assert!(e.decomposition.is_strict(s).unwrap());
    }

    #[test]
    fn single_level() {
        let g = Graph::cycle(4);
        let s = g.structure();
        let levels = vec![(0..4).collect::<BTreeSet<usize>>()];
        let o = level_order(s, &levels).unwrap();
        assert!((0..4).all(|a| (0..4).all(|b| o.equivalent(a, b))));
        assert_eq!(extract_tree(s, &levels).unwrap().tree.len(), 1);
    }

    #[test]
    fn gap_is_reported() {
        // v1 - v2 - v3 decomposed as {v1,v2} / {v2} / {v2,v3}: the middle
        // vertex introduces nothing, so v3 first appears two levels down
        let g = Graph::path(2);
        let s = g.structure();
        let levels = vec![BTreeSet::from([0, 1]), BTreeSet::new(), BTreeSet::from([2])];
        let err = extract_tree(s, &levels).unwrap_err();
        assert!(err.to_string().contains("{v3}"), "{err}");
        assert!(level_order(s, &[BTreeSet::from([0, 1])]).is_err());
        assert!(level_order(s, &[BTreeSet::from([0, 1]), BTreeSet::from([1, 2])]).is_err());
    }

    #[test]
    fn random_strict_recovered() {
        let mut r = crate::random::rng(21);
        for i in 0..80 {
            let g = crate::random::random_graph(&mut r, 1 + i % 8, 0.4);
            let s = g.structure();
            let tree = crate::random::random_tree_of_height(&mut r, 1 + i % 6, 3);
            let d = crate::decomposition::ops::random_decomposition_on(&mut r, s, tree).strictify(s).unwrap();
            let report = d.strictness(s).unwrap();
            assert!(report.is_strict());
            let levels = levels_of(&d, s).unwrap();
            let o = level_order(s, &levels).unwrap();
            for a in 0..s.len() {
                for b in 0..s.len() {
                    assert_eq!(o.le(a, b), d.tree().le(report.mu[a], report.mu[b]));
                }
            }
            let e = extract_tree(s, &levels).unwrap();
            assert_eq!(e.tree.shape(), d.tree().shape());
        }
    }
}
