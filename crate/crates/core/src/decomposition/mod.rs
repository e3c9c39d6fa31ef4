//! Tree decompositions: validation, widths, contraction and strictness.

mod levels;
mod ops;
mod strict;
mod width;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dot::tree_dot;
use crate::error::{Error, Result};
use crate::graph::UnionFind;
use crate::structure::Structure;
use crate::tree::{seq_string, TreeDomain};

pub use levels::{extract_tree, level_order, levels_of, ExtractedTree, LevelOrder};
pub use ops::{dfs_decomposition, random_decomposition, random_decomposition_on, reduce_height, reduction_set};
pub use strict::{StrictViolation, StrictnessReport};
pub use width::{exact_width, exhaustive_width, graph_width, WidthMode, DEFAULT_EXACT_BUDGET};

/// A family of bags indexed by the vertices of a tree domain. Bags hold
/// element indices of the decomposed structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    tree: TreeDomain,
    bags: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A bag mentions an index outside the domain.
    UnknownElement { node: String, index: usize },
    Missing { element: String },
    Disconnected { element: String },
    Uncovered { relation: String, tuple: Vec<String> },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::UnknownElement { node, index } => write!(f, "bag {node:?} has unknown element #{index}"),
            Violation::Missing { element } => write!(f, "{element} occurs in no bag"),
            Violation::Disconnected { element } => write!(f, "bags containing {element} are not connected"),
            Violation::Uncovered { relation, tuple } => {
                write!(f, "tuple {relation}({}) lies in no bag", tuple.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DecompositionJson {
    pub tree: Vec<String>,
    pub bags: BTreeMap<String, Vec<String>>,
}

impl TreeDecomposition {
    pub fn new(tree: TreeDomain, bags: Vec<BTreeSet<usize>>) -> Result<Self> {
        if tree.len() != bags.len() {
            return Err(Error::Structural(format!(
                "{} bags for a tree with {} vertices",
                bags.len(),
                tree.len()
            )));
        }
        if tree.is_empty() {
            return Err(Error::Structural("decomposition over an empty tree".into()));
        }
        Ok(TreeDecomposition { tree, bags })
    }

    /// Builds a decomposition from a parent array (one entry per node);
    /// children are ordered by index.
    pub fn from_parents(parents: &[Option<usize>], bags: Vec<BTreeSet<usize>>) -> Result<Self> {
        let (tree, map) = TreeDomain::from_parents(parents)?;
        let mut out = vec![BTreeSet::new(); bags.len()];
        for (i, b) in bags.into_iter().enumerate() {
            out[map[i]] = b;
        }
        TreeDecomposition::new(tree, out)
    }

    /// The one-bag decomposition.
    pub fn trivial(s: &Structure) -> Self {
        TreeDecomposition {
            tree: TreeDomain::chain(1),
            bags: vec![(0..s.len()).collect()],
        }
    }

    pub fn tree(&self) -> &TreeDomain {
        &self.tree
    }

    pub fn bags(&self) -> &[BTreeSet<usize>] {
        &self.bags
    }

    pub fn bag(&self, v: usize) -> &BTreeSet<usize> {
        &self.bags[v]
    }

    /// Maximal bag size minus one; −1 when every bag is empty.
    pub fn width(&self) -> isize {
        self.bags.iter().map(|b| b.len() as isize).max().unwrap_or(0) - 1
    }

    pub fn height(&self) -> usize {
        self.tree.height()
    }

    pub fn violations(&self, s: &Structure) -> Vec<Violation> {
        let n = s.len();
        let mut out = Vec::new();
        let mut occ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, bag) in self.bags.iter().enumerate() {
            for &a in bag {
                if a >= n {
                    out.push(Violation::UnknownElement {
                        node: seq_string(self.tree.node(v)),
                        index: a,
                    });
                } else {
                    occ[a].push(v);
                }
            }
        }
        for (a, nodes) in occ.iter().enumerate() {
            if nodes.is_empty() {
                out.push(Violation::Missing {
                    element: s.element(a).to_string(),
                });
                continue;
            }
            // connected iff exactly one occurrence has its parent outside the set
            let tops = nodes
                .iter()
                .filter(|&&v| self.tree.parent(v).map_or(true, |p| !self.bags[p].contains(&a)))
                .count();
            if tops != 1 {
                out.push(Violation::Disconnected {
                    element: s.element(a).to_string(),
                });
            }
        }
        for (r, sym) in s.signature().symbols().iter().enumerate() {
            for t in s.relation_at(r) {
                let covered = match t.first() {
                    None => true,
                    Some(&a0) => occ[a0]
                        .iter()
                        .any(|&v| t.iter().all(|a| self.bags[v].contains(a))),
                };
                if !covered {
                    out.push(Violation::Uncovered {
                        relation: sym.name.clone(),
                        tuple: t.iter().map(|&a| s.element(a).to_string()).collect(),
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self, s: &Structure) -> bool {
        self.violations(s).is_empty()
    }

    pub(crate) fn require_valid(&self, s: &Structure) -> Result<()> {
        match self.violations(s).first() {
            None => Ok(()),
            Some(v) => Err(Error::Structural(format!("invalid tree decomposition: {v}"))),
        }
    }

    /// `D/F`: contracts the given tree edges `(parent, child)`; the bag of a
    /// class is the union of its members' bags.
    pub fn contract(&self, edges: &[(usize, usize)]) -> Result<TreeDecomposition> {
        let n = self.tree.len();
        let mut uf = UnionFind::new(n);
        for &(p, c) in edges {
            if c >= n || self.tree.parent(c) != Some(p) {
                return Err(Error::Argument(format!(
                    "({}, {}) is not an edge of the tree",
                    self.node_label(p),
                    self.node_label(c)
                )));
            }
            uf.union(p, c);
        }
        let classes = uf.classes();
        let mut class_of = vec![0; n];
        for (i, cls) in classes.iter().enumerate() {
            for &v in cls {
                class_of[v] = i;
            }
        }
        // lexicographic order puts each class's topmost vertex first
        let parents: Vec<Option<usize>> = classes
            .iter()
            .map(|cls| self.tree.parent(cls[0]).map(|p| class_of[p]))
            .collect();
        let bags = classes
            .iter()
            .map(|cls| cls.iter().flat_map(|&v| self.bags[v].iter().copied()).collect())
            .collect();
        TreeDecomposition::from_parents(&parents, bags)
    }

    fn node_label(&self, v: usize) -> String {
        if v < self.tree.len() {
            format!("{:?}", seq_string(self.tree.node(v)))
        } else {
            format!("#{v}")
        }
    }

    pub fn to_json(&self, s: &Structure) -> DecompositionJson {
        let tree = self.tree.to_strings();
        let bags = tree
            .iter()
            .zip(&self.bags)
            .map(|(k, b)| (k.clone(), b.iter().map(|&a| s.element(a).to_string()).collect()))
            .collect();
        DecompositionJson { tree, bags }
    }

    pub fn from_json(json: &DecompositionJson, s: &Structure) -> Result<TreeDecomposition> {
        let tree = TreeDomain::from_strings(&json.tree)?;
        let mut bags = vec![BTreeSet::new(); tree.len()];
        for (key, names) in &json.bags {
            let v = tree
                .to_strings()
                .iter()
                .position(|k| k == key)
                .ok_or_else(|| Error::Format(format!("bag for unknown tree vertex {key:?}")))?;
            for name in names {
                let a = s
                    .index_of(name)
                    .ok_or_else(|| Error::Format(format!("bag {key:?} names unknown element {name}")))?;
                bags[v].insert(a);
            }
        }
        TreeDecomposition::new(tree, bags)
    }

    pub fn to_dot(&self, s: &Structure) -> String {
        tree_dot(&self.tree, |v| {
            let names: Vec<&str> = self.bags[v].iter().map(|&a| s.element(a)).collect();
            format!("{{{}}}", names.join(", "))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    pub(crate) fn example_structure() -> Structure {
        // the running example: R = {(a,b,c),(a,b,d),(a,b,e)}
        let sig = crate::Signature::new([("R", 3)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b", "c", "d", "e"]).unwrap();
        for x in ["c", "d", "e"] {
            s.add_tuple("R", &["a", "b", x]).unwrap();
        }
        s
    }

    fn bags(s: &Structure, sets: &[&[&str]]) -> Vec<BTreeSet<usize>> {
        sets.iter()
            .map(|b| b.iter().map(|x| s.index_of(x).unwrap()).collect())
            .collect()
    }

    #[test]
    fn path_decomposition_of_example() {
        let s = example_structure();
        let d = TreeDecomposition::new(
            TreeDomain::chain(3),
            bags(&s, &[&["a", "b", "c"], &["a", "b", "d"], &["a", "b", "e"]]),
        )
        .unwrap();
        assert!(d.is_valid(&s));
        assert_eq!(d.width(), 2);
        assert_eq!(d.height(), 3);
    }

    #[test]
    fn uncovered_edge_reported() {
        let g = Graph::new(["v1", "v2", "v3"], &[(0, 2)]).unwrap();
        let s = g.structure();
        let d = TreeDecomposition::new(
            TreeDomain::from_strings(&["", "0"]).unwrap(),
            bags(s, &[&["v1", "v2"], &["v3"]]),
        )
        .unwrap();
        let v = d.violations(s);
        assert!(v.contains(&Violation::Uncovered {
            relation: "edg".into(),
            tuple: vec!["v1".into(), "v3".into()],
        }));
        let trivial = TreeDecomposition::trivial(s);
        assert!(trivial.is_valid(s));
        assert_eq!(trivial.width(), 2);
    }

    #[test]
    fn disconnected_and_missing() {
        let g = Graph::path(2);
        let s = g.structure();
        let d = TreeDecomposition::new(
            TreeDomain::from_strings(&["", "0", "00"]).unwrap(),
            bags(s, &[&["v1", "v2"], &["v2"], &["v1"]]),
        )
        .unwrap();
        let v = d.violations(s);
        assert!(v.contains(&Violation::Disconnected { element: "v1".into() }));
        assert!(v.contains(&Violation::Missing { element: "v3".into() }));
    }

    #[test]
    fn contraction() {
        let g = Graph::path(3);
        let s = g.structure();
        let d = TreeDecomposition::new(
            TreeDomain::from_strings(&["", "0", "1"]).unwrap(),
            bags(s, &[&["v2", "v3"], &["v1", "v2"], &["v3", "v4"]]),
        )
        .unwrap();
        assert_eq!(d.contract(&[]).unwrap(), d);
        let one = d.contract(&[(0, 1)]).unwrap();
        assert_eq!(one.width(), 2);
        assert!(one.is_valid(s));
        let all = d.contract(&[(0, 1), (0, 2)]).unwrap();
        assert_eq!(all.tree().len(), 1);
        assert_eq!(all.bag(0).len(), 4);
        assert!(matches!(d.contract(&[(1, 2)]), Err(Error::Argument(_))));
    }

    #[test]
    fn json_roundtrip() {
        let g = Graph::path(3);
        let s = g.structure();
        let text = r#"{"tree":["","0","1"],"bags":{"":["v2","v3"],"0":["v1","v2"],"1":["v3","v4"]}}"#;
        let j: DecompositionJson = serde_json::from_str(text).unwrap();
        let d = TreeDecomposition::from_json(&j, s).unwrap();
        assert!(d.is_valid(s));
        assert_eq!(d.to_json(s), j);
        assert!(d.to_dot(s).contains("{v1, v2}"));
    }
}
