//! Simple graphs as structures over the single binary symbol `edg`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{check_budget, Error, Result};
use crate::structure::{Signature, Structure};

pub const EDGE: &str = "edg";

/// A graph over `{edg/2}`. Undirected graphs store `edg` symmetrically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    s: Structure,
    directed: bool,
    adj: Vec<Vec<usize>>,
}

pub fn edge_signature() -> Signature {
    Signature::new([(EDGE, 2)]).expect("static signature")
}

/// Zero-padded vertex names `v1..vn` so that lexicographic and numeric order agree.
pub(crate) fn vertex_names(n: usize) -> Vec<String> {
    let width = n.to_string().len();
    (1..=n).map(|i| format!("v{i:0width$}")).collect()
}

impl Graph {
    pub(crate) fn from_edge_set(domain: Vec<String>, edges: BTreeSet<Vec<usize>>, directed: bool) -> Graph {
        let s = Structure::from_indexed(edge_signature(), domain, vec![edges]);
        Graph::wrap(s, directed)
    }

    fn wrap(s: Structure, directed: bool) -> Graph {
        let mut adj = vec![Vec::new(); s.len()];
        for t in s.relation_at(0) {
            adj[t[0]].push(t[1]);
        }
        Graph { s, directed, adj }
    }

    /// Undirected graph from names and index pairs; loops are rejected.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, edges: &[(usize, usize)]) -> Result<Graph> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::Structural(format!("loop at {}", names.get(u).map_or("?", |s| s))));
            }
            set.insert(vec![u, v]);
            set.insert(vec![v, u]);
        }
        let s = Structure::from_named(edge_signature(), names, vec![set])?;
        Ok(Graph::wrap(s, false))
    }

    /// Interprets a structure over `{edg/2}` as a graph.
    pub fn from_structure(s: &Structure, directed: bool) -> Result<Graph> {
        let sig = s.signature();
        if sig.len() != 1 || sig.arity(EDGE) != Some(2) {
            return Err(Error::Signature("a graph needs exactly the symbol edg/2".into()));
        }
        let r = s.relation_at(0);
        if let Some(t) = r.iter().find(|t| t[0] == t[1]) {
            return Err(Error::Structural(format!("loop at {}", s.element(t[0]))));
        }
        if !directed {
            if let Some(t) = r.iter().find(|t| !r.contains(&vec![t[1], t[0]])) {
                return Err(Error::Structural(format!(
                    "edge {} {} is not symmetric",
                    s.element(t[0]),
                    s.element(t[1])
                )));
            }
        }
        Ok(Graph::wrap(s.clone(), directed))
    }

    /// The symmetric closure of an arbitrary binary structure, loops dropped.
    pub fn symmetrized(s: &Structure) -> Result<Graph> {
        let r = s
            .relation(EDGE)
            .ok_or_else(|| Error::Signature("missing edg".into()))?;
        let mut set = BTreeSet::new();
        for t in r {
            if t[0] != t[1] {
                set.insert(vec![t[0], t[1]]);
                set.insert(vec![t[1], t[0]]);
            }
        }
        Ok(Graph::from_edge_set(s.domain().to_vec(), set, false))
    }

    pub fn structure(&self) -> &Structure {
        &self.s
    }

    pub fn into_structure(self) -> Structure {
        self.s
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_count(&self) -> usize {
        self.s.len()
    }

    pub fn name(&self, v: usize) -> &str {
        self.s.element(v)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.s.index_of(name)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn adjacent_names(&self, u: &str, v: &str) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(u), Some(v)) => self.adjacent(u, v),
            _ => false,
        }
    }

    /// Edges as pairs; for undirected graphs each edge once with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.s
            .relation_at(0)
            .iter()
            .filter(|t| self.directed || t[0] < t[1])
            .map(|t| (t[0], t[1]))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Neighbourhood bitmasks; only meaningful for at most 64 vertices.
    pub fn masks(&self) -> Vec<u64> {
        assert!(self.vertex_count() <= 64, "bitmask view needs at most 64 vertices");
        self.adj
            .iter()
            .map(|ns| ns.iter().fold(0u64, |m, &v| m | 1 << v))
            .collect()
    }

    pub fn induced(&self, keep: &[usize]) -> Graph {
        Graph::wrap(self.s.induced(keep), self.directed)
    }

    /// Connected components (weak, for directed graphs), each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut und = vec![Vec::new(); n];
        for (u, v) in self.edges() {
            und[u].push(v);
            und[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in &und[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Quotient by the equivalence generated by `edges`; classes are named by
    /// joining member names with `+`.
    pub fn contract_edges(&self, edges: &[(usize, usize)]) -> Result<Graph> {
        let n = self.vertex_count();
        let mut uf = UnionFind::new(n);
        for &(u, v) in edges {
            if u >= n || v >= n || !(self.adjacent(u, v) || self.adjacent(v, u)) {
                return Err(Error::Argument(format!("({u}, {v}) is not an edge")));
            }
            uf.union(u, v);
        }
        let classes = uf.classes();
        Ok(self.quotient(&classes))
    }

    /// Graph on the given disjoint vertex classes, adjacent when some members are.
    pub(crate) fn quotient(&self, classes: &[Vec<usize>]) -> Graph {
        let mut class_of = BTreeMap::new();
        for (i, c) in classes.iter().enumerate() {
            for &v in c {
                class_of.insert(v, i);
            }
        }
        let names: Vec<String> = classes
            .iter()
            .map(|c| c.iter().map(|&v| self.name(v)).collect::<Vec<_>>().join("+"))
            .collect();
        let mut set = BTreeSet::new();
        for (u, v) in self.edges() {
            if let (Some(&a), Some(&b)) = (class_of.get(&u), class_of.get(&v)) {
                if a != b {
                    set.insert(vec![a, b]);
                    if !self.directed {
                        set.insert(vec![b, a]);
                    }
                }
            }
        }
        let s = Structure::from_named(edge_signature(), names, vec![set]).expect("distinct class names");
        Graph::wrap(s, self.directed)
    }

    pub fn without_edges(&self, deleted: &[(usize, usize)]) -> Graph {
        let del: BTreeSet<(usize, usize)> = deleted
            .iter()
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect();
        let set = self
            .s
            .relation_at(0)
            .iter()
            .filter(|t| !del.contains(&(t[0], t[1])))
            .cloned()
            .collect();
        Graph::from_edge_set(self.s.domain().to_vec(), set, self.directed)
    }

    /// Number of vertices on a longest simple path (0 for the empty graph).
    pub fn longest_path_vertices(&self, budget: usize) -> Result<usize> {
        check_budget("vertices for longest path", budget, self.vertex_count())?;
        fn go(g: &Graph, v: usize, seen: &mut Vec<bool>, depth: usize, best: &mut usize) {
            *best = (*best).max(depth);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    go(g, w, seen, depth + 1, best);
                    seen[w] = false;
                }
            }
        }
        let n = self.vertex_count();
        let mut best = 0;
        for v in 0..n {
            let mut seen = vec![false; n];
            seen[v] = true;
            go(self, v, &mut seen, 1, &mut best);
            if best == n {
                break;
            }
        }
        Ok(best)
    }

    /// Path with `l` edges on vertices `v1..v(l+1)`.
    pub fn path(l: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (1..=l).map(|i| (i - 1, i)).collect();
        Graph::new(vertex_names(l + 1), &edges).expect("path")
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::new(vertex_names(n), &edges).expect("clique")
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(vertex_names(n), &edges).expect("cycle")
    }

    pub fn edgeless(n: usize) -> Graph {
        Graph::new(vertex_names(n), &[]).expect("edgeless")
    }

    /// One graph per isomorphism class on exactly `n` vertices, built by
    /// adding a vertex with every possible neighbourhood to the classes on
    /// `n − 1` vertices.
    pub fn catalogue(n: usize) -> Vec<Graph> {
        let mut level = vec![Graph::edgeless(0)];
        for size in 1..=n {
            let mut seen = std::collections::HashSet::new();
            let mut next = Vec::new();
            for g in &level {
                let old = g.edges();
                for nbhd in 0u64..1 << (size - 1) {
                    let mut edges = old.clone();
                    edges.extend((0..size - 1).filter(|&u| nbhd >> u & 1 == 1).map(|u| (u, size - 1)));
                    let h = Graph::new(vertex_names(size), &edges).expect("catalogue graph");
                    if seen.insert(crate::iso::canonical_form(h.structure())) {
                        next.push(h);
                    }
                }
            }
            level = next;
        }
        level
    }

    /// The m x n grid on `[m] x [n]`, vertex `(i,j)` named `g{i}_{j}`.
    pub fn grid(m: usize, n: usize) -> Graph {
        let w = m.max(n).to_string().len();
        let names: Vec<String> = (0..m)
            .flat_map(|i| (0..n).map(move |j| format!("g{i:0w$}_{j:0w$}")))
            .collect();
        let id = |i: usize, j: usize| i * n + j;
        let mut edges = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if i + 1 < m {
                    edges.push((id(i, j), id(i + 1, j)));
                }
                if j + 1 < n {
                    edges.push((id(i, j), id(i, j + 1)));
                }
            }
        }
        Graph::new(names, &edges).expect("grid")
    }

    /// Coordinates of a grid vertex produced by [`Graph::grid`].
    pub fn grid_coords(name: &str) -> Option<(usize, usize)> {
        let rest = name.strip_prefix('g')?;
        let (i, j) = rest.split_once('_')?;
        Some((i.parse().ok()?, j.parse().ok()?))
    }

    pub fn to_dot(&self) -> String {
        crate::dot::graph_dot(self)
    }
}

/// Disjoint-set forest with path halving.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
        }
    }

    /// Classes sorted by least member.
    pub(crate) fn classes(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}
