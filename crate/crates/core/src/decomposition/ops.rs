//! DFS decompositions, height reduction and random decompositions.

use std::collections::BTreeSet;

use rand::Rng;

use super::TreeDecomposition;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::random::{random_tree_domain, Rng64};
use crate::structure::Structure;
use crate::tree::TreeDomain;

/// Bags `U_v = {u : u ⪯ v}` along a depth-first spanning forest; the forest
/// of a disconnected graph hangs below an extra empty root.
pub fn dfs_decomposition(g: &Graph) -> TreeDecomposition {
    let n = g.vertex_count();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut roots = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        roots.push(start);
        seen[start] = true;
        // iterative DFS keeping the next neighbour position per vertex
        let mut stack = vec![(start, 0usize)];
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            let ns = g.neighbors(u);
            let mut next = None;
            while *i < ns.len() {
                let w = ns[*i];
                *i += 1;
                if !seen[w] {
                    next = Some(w);
                    break;
                }
            }
            match next {
                Some(w) => {
                    seen[w] = true;
                    parent[w] = Some(u);
                    stack.push((w, 0));
                }
                None => {
                    stack.pop();
                }
            }
        }
    }
    let mut bags: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| {
            let mut b = BTreeSet::from([v]);
            let mut cur = v;
            while let Some(p) = parent[cur] {
                b.insert(p);
                cur = p;
            }
            b
        })
        .collect();
    if roots.len() != 1 {
        for &r in &roots {
            parent[r] = Some(n);
        }
        parent.push(None);
        bags.push(BTreeSet::new());
    }
    TreeDecomposition::from_parents(&parent, bags).expect("spanning forest")
}

/// The set P of the height-reduction construction: leaves at level `n`
/// (0-based) and, closing upwards, every vertex with at least `m` children in P.
pub fn reduction_set(d: &TreeDecomposition, n: usize, m: usize) -> Vec<bool> {
    let t = d.tree();
    let mut in_p = vec![false; t.len()];
    for v in (0..t.len()).rev() {
        let kids = t.children(v).iter().filter(|&&c| in_p[c]).count();
        in_p[v] = (t.is_leaf(v) && t.level(v) == n) || kids >= m;
    }
    in_p
}

/// Turns a decomposition of height ≤ n+1 into one of height ≤ n and width
/// below m(k+1) by contracting every edge from outside P into P. Fails when
/// the root lies in P, i.e. when `m^{<n+1}` embeds into the tree.
pub fn reduce_height(d: &TreeDecomposition, n: usize, m: usize) -> Result<TreeDecomposition> {
    if d.height() > n + 1 {
        return Err(Error::Argument(format!(
            "decomposition has height {}, expected at most {}",
            d.height(),
            n + 1
        )));
    }
    let in_p = reduction_set(d, n, m);
    if in_p[0] {
        return Err(Error::Argument(format!(
            "the complete tree {m}^<{} embeds into the decomposition tree",
            n + 1
        )));
    }
    let t = d.tree();
    let f: Vec<(usize, usize)> = (1..t.len())
        .filter(|&v| in_p[v])
        .map(|v| (t.parent(v).expect("non-root"), v))
        .filter(|&(p, _)| !in_p[p])
        .collect();
    d.contract(&f)
}

/// A random valid decomposition of `s` over the given tree: each element gets
/// a random home vertex, and each tuple pulls its elements along tree paths to
/// a random common vertex.
pub fn random_decomposition_on(r: &mut Rng64, s: &Structure, tree: TreeDomain) -> TreeDecomposition {
    let m = tree.len();
    let mut bags = vec![BTreeSet::new(); m];
    let mut home = vec![0; s.len()];
    for (a, h) in home.iter_mut().enumerate() {
        *h = r.gen_range(0..m);
        bags[*h].insert(a);
    }
    let path = |u: usize, w: usize| -> Vec<usize> {
        let inf = tree.infimum(u, w);
        let mut p: Vec<usize> = tree.path_to(u).into_iter().filter(|&x| tree.le(inf, x)).collect();
        p.extend(tree.path_to(w).into_iter().filter(|&x| tree.le(inf, x)));
        p
    };
    for rel in s.relations() {
        for tuple in rel {
            let w = r.gen_range(0..m);
            for &a in tuple {
                for x in path(home[a], w) {
                    bags[x].insert(a);
                }
            }
        }
    }
    // occasionally widen a bag with a neighbouring vertex's content
    for _ in 0..r.gen_range(0..=m / 2) {
        let v = r.gen_range(0..m);
        if let Some(p) = tree.parent(v) {
            let extra: Vec<usize> = bags[p].iter().copied().collect();
            bags[v].extend(extra);
        }
    }
    TreeDecomposition::new(tree, bags).expect("bag per vertex")
}

pub fn random_decomposition(r: &mut Rng64, s: &Structure, max_nodes: usize) -> TreeDecomposition {
    let m = r.gen_range(1..=max_nodes.max(1));
    let tree = random_tree_domain(r, m);
    random_decomposition_on(r, s, tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_connected_graph, random_tree_of_height, rng};

    #[test]
    fn dfs_of_triangle_is_a_chain() {
        let d = dfs_decomposition(&Graph::complete(3));
        assert_eq!(d.height(), 3);
        assert_eq!(d.width(), 2);
        assert!(d.is_valid(Graph::complete(3).structure()));
        let one = dfs_decomposition(&Graph::edgeless(1));
        assert_eq!((one.width(), one.height()), (0, 1));
    }

    #[test]
    fn dfs_bounds_on_random_graphs() {
        let mut r = rng(11);
        for i in 0..50 {
            let g = random_connected_graph(&mut r, 1 + i % 8, 0.3);
            let d = dfs_decomposition(&g);
            assert!(d.is_valid(g.structure()));
            let l = g.longest_path_vertices(10).unwrap();
            assert!(d.height() <= l);
            assert!(d.width() < l as isize);
        }
        let g = Graph::edgeless(3);
        let d = dfs_decomposition(&g);
        assert!(d.is_valid(g.structure()));
        assert!(d.bag(0).is_empty());
    }

    #[test]
    fn reduce_height_on_a_chain() {
        let g = Graph::path(2);
        let s = g.structure();
        let d = TreeDecomposition::new(
            TreeDomain::chain(3),
            vec![BTreeSet::from([0]), BTreeSet::from([0, 1]), BTreeSet::from([1, 2])],
        )
        .unwrap();
        let out = reduce_height(&d, 2, 2).unwrap();
        assert_eq!(out.height(), 2);
        assert!(out.is_valid(s));
        assert_eq!(out.tree().len(), 2);
        assert_eq!(reduce_height(&out, 2, 2).unwrap(), out);
        assert!(matches!(reduce_height(&d, 2, 1), Err(Error::Argument(_))));
        assert!(matches!(reduce_height(&d, 1, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn reduce_height_random() {
        let mut r = rng(5);
        let mut checked = 0;
        for i in 0..300 {
            let g = crate::random::random_graph(&mut r, 2 + i % 7, 0.4);
            let n = 1 + i % 3;
            let m = 2 + i % 2;
            let tree = random_tree_of_height(&mut r, 2 + i % 9, n + 1);
            let d = random_decomposition_on(&mut r, g.structure(), tree);
            let Ok(out) = reduce_height(&d, n, m) else {
                assert!(TreeDomain::complete(m, n + 1).embed_into(d.tree(), 64).unwrap().is_some());
                continue;
            };
            checked += 1;
            assert!(out.is_valid(g.structure()));
            assert!(out.height() <= n);
            assert!(out.width() < (m as isize) * (d.width() + 1));
        }
        assert!(checked > 100);
    }
}
