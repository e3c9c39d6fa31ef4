//! Exact tree-width, path-width and n-depth tree-width.
//!
//! The primary algorithms are subset dynamic programs (elimination orderings
//! for twd, vertex separation for pwd) and a memoised search over canonical
//! height-bounded decompositions for twd_n. `exhaustive_width` enumerates
//! orderings / level assignments directly and serves as an oracle.

use std::collections::{BTreeSet, HashMap};

use super::TreeDecomposition;
use crate::error::{check_budget, Error, Result};
use crate::graph::Graph;
use crate::structure::Structure;

pub const DEFAULT_EXACT_BUDGET: usize = 10;
const HARD_LIMIT: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WidthMode {
    Tree,
    Path,
    /// Tree-width over decompositions of height at most n.
    Depth(usize),
}

impl std::fmt::Display for WidthMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WidthMode::Tree => write!(f, "twd"),
            WidthMode::Path => write!(f, "pwd"),
            WidthMode::Depth(n) => write!(f, "twd_{n}"),
        }
    }
}

impl std::str::FromStr for WidthMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twd" => Ok(WidthMode::Tree),
            "pwd" => Ok(WidthMode::Path),
            _ => s
                .strip_prefix("twd_")
                .or_else(|| s.strip_prefix("twd"))
                .and_then(|n| n.parse().ok())
                .map(WidthMode::Depth)
                .ok_or_else(|| Error::Argument(format!("unknown width mode {s:?} (twd, pwd, twd_N)"))),
        }
    }
}

/// Optimal width of `s` (via its Gaifman graph) with a witness.
pub fn exact_width(s: &Structure, mode: WidthMode, budget: usize) -> Result<(isize, TreeDecomposition)> {
    graph_width(&s.gaifman(), mode, budget)
}

pub fn graph_width(g: &Graph, mode: WidthMode, budget: usize) -> Result<(isize, TreeDecomposition)> {
    let n = g.vertex_count();
    check_budget("vertices for exact width", budget.min(HARD_LIMIT), n)?;
    if mode == WidthMode::Depth(0) {
        return Err(Error::Argument("height-0 decompositions do not exist".into()));
    }
    let adj = g.masks();
    if n == 0 {
        let d = TreeDecomposition::new(crate::tree::TreeDomain::chain(1), vec![BTreeSet::new()])?;
        return Ok((-1, d));
    }
    let d = match mode {
        WidthMode::Tree => elimination_decomposition(&adj, &treewidth_order(&adj)),
        WidthMode::Path => path_decomposition(&adj, &separation_order(&adj)),
        WidthMode::Depth(h) => DepthSearch::new(&adj).witness(h)?,
    };
    Ok((d.width(), d))
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            i
        })
    })
}

fn neighbourhood(adj: &[u64], set: u64) -> u64 {
    bits(set).fold(0, |acc, v| acc | adj[v]) & !set
}

/// Vertices outside `s ∪ {v}` reachable from `v` through `s`.
fn q_set(adj: &[u64], s: u64, v: usize) -> u64 {
    let mut reach = 1u64 << v;
    loop {
        let next = reach | (neighbourhood(adj, reach) & s);
        if next == reach {
            break;
        }
        reach = next;
    }
    neighbourhood(adj, reach) & !s
}

/// Elimination ordering of minimum width: TW(S) = min_v max(TW(S−v), |Q(S−v,v)|).
fn treewidth_order(adj: &[u64]) -> Vec<usize> {
    let n = adj.len();
    let full = (1u64 << n) - 1;
    let mut tw = vec![i32::MAX; 1 << n];
    tw[0] = -1;
    for s in 1..=full {
        let mut best = i32::MAX;
        for v in bits(s) {
            let rest = s & !(1 << v);
            let w = tw[rest as usize].max(q_set(adj, rest, v).count_ones() as i32);
            best = best.min(w);
        }
        tw[s as usize] = best;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let target = tw[s as usize];
        let v = bits(s)
            .find(|&v| {
                let rest = s & !(1 << v);
                tw[rest as usize].max(q_set(adj, rest, v).count_ones() as i32) == target
            })
            .expect("optimal choice");
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    order
}

/// The decomposition of an elimination ordering: one bag `{v} ∪ N⁺(v)` per
/// vertex in the fill-in graph, hung below the earliest eliminated higher
/// neighbour. Several roots are joined under an empty bag.
fn elimination_decomposition(adj: &[u64], order: &[usize]) -> TreeDecomposition {
    let n = adj.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut fill = adj.to_vec();
    let mut remaining = (1u64 << n) - 1;
    let mut parents = vec![None; n];
    let mut bags = vec![BTreeSet::new(); n];
    for &v in order {
        remaining &= !(1 << v);
        let higher = fill[v] & remaining;
        for u in bits(higher) {
            fill[u] |= higher & !(1 << u);
        }
        bags[v] = bits(higher | 1 << v).collect();
        parents[v] = bits(higher).min_by_key(|&u| pos[u]);
    }
    let roots = parents.iter().filter(|p| p.is_none()).count();
    if roots > 1 {
        for p in parents.iter_mut() {
            if p.is_none() {
                *p = Some(n);
            }
        }
        parents.push(None);
        bags.push(BTreeSet::new());
    }
    TreeDecomposition::from_parents(&parents, bags).expect("elimination tree")
}

/// Layout minimising the vertex separation number.
fn separation_order(adj: &[u64]) -> Vec<usize> {
    let n = adj.len();
    let full = (1u64 << n) - 1;
    let boundary = |s: u64| bits(s).filter(|&u| adj[u] & !s != 0).count() as i32;
    let mut vs = vec![0i32; 1 << n];
    for s in 1..=full {
        let best = bits(s).map(|v| vs[(s & !(1 << v)) as usize]).min().expect("nonempty");
        vs[s as usize] = best.max(boundary(s));
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let best = bits(s).map(|v| vs[(s & !(1 << v)) as usize]).min().expect("nonempty");
        let v = bits(s).find(|&v| vs[(s & !(1 << v)) as usize] == best).expect("optimal choice");
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    order
}

/// Bag i = {v_i} ∪ (earlier vertices with a neighbour not yet placed).
fn path_decomposition(adj: &[u64], order: &[usize]) -> TreeDecomposition {
    let mut placed = 0u64;
    let mut bags = Vec::with_capacity(order.len());
    for &v in order {
        let frontier = bits(placed).filter(|&u| adj[u] & !placed != 0);
        bags.push(frontier.chain([v]).collect::<BTreeSet<usize>>());
        placed |= 1 << v;
    }
    let parents: Vec<Option<usize>> = (0..order.len()).map(|i| i.checked_sub(1)).collect();
    TreeDecomposition::from_parents(&parents, bags).expect("path")
}

fn components(adj: &[u64], set: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut left = set;
    while left != 0 {
        let mut comp = left & left.wrapping_neg();
        loop {
            let next = comp | (neighbourhood(adj, comp) & set);
            if next == comp {
                break;
            }
            comp = next;
        }
        out.push(comp);
        left &= !comp;
    }
    out
}

/// Calls `f` on every subset of `set` with exactly `k` elements, in
/// lexicographic order of positions; stops early when `f` returns false.
fn for_each_subset(set: u64, k: usize, mut f: impl FnMut(u64) -> bool) {
    let items: Vec<u64> = bits(set).map(|i| 1u64 << i).collect();
    if k > items.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(idx.iter().fold(0, |m, &i| m | items[i])) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < items.len() - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Height-bounded search. `best(C, X, h)` is the least width of a
/// decomposition of height ≤ h of the part `C` whose root bag must also hold
/// the attachment set `X = N(C)`; the root bag is `X ∪ Y` for some `Y ⊆ C`
/// and each component of `C − Y` becomes a child subtree.
struct DepthSearch<'a> {
    adj: &'a [u64],
    memo: HashMap<(u64, u64, usize), (i32, u64)>,
}

impl<'a> DepthSearch<'a> {
    fn new(adj: &'a [u64]) -> Self {
        DepthSearch {
            adj,
            memo: HashMap::new(),
        }
    }

    fn best(&mut self, c: u64, x: u64, h: usize) -> i32 {
        if c == 0 {
            return -1;
        }
        if h == 0 {
            return i32::MAX;
        }
        // one vertex per level always suffices
        let h = h.min(c.count_ones() as usize);
        if let Some(&(w, _)) = self.memo.get(&(c, x, h)) {
            return w;
        }
        let base = x.count_ones() as i32;
        let result = if h == 1 {
            (base + c.count_ones() as i32 - 1, c)
        } else {
            let mut best = (i32::MAX, c);
            for k in 0..=c.count_ones() as usize {
                if base + k as i32 - 1 >= best.0 {
                    break;
                }
                let adj = self.adj;
                let mut found = Vec::new();
                for_each_subset(c, k, |y| {
                    found.push(y);
                    true
                });
                for y in found {
                    let mut w = base + k as i32 - 1;
                    for comp in components(adj, c & !y) {
                        if w >= best.0 {
                            break;
                        }
                        let att = neighbourhood(adj, comp);
                        w = w.max(self.best(comp, att, h - 1));
                    }
                    if w < best.0 {
                        best = (w, y);
                    }
                }
            }
            best
        };
        self.memo.insert((c, x, h), result);
        result.0
    }

    fn witness(&mut self, h: usize) -> Result<TreeDecomposition> {
        let full = (1u64 << self.adj.len()) - 1;
        if self.best(full, 0, h) == i32::MAX {
            return Err(Error::Argument(format!("no decomposition of height {h}")));
        }
        let mut parents = Vec::new();
        let mut bags = Vec::new();
        self.build(full, 0, h, None, &mut parents, &mut bags);
        TreeDecomposition::from_parents(&parents, bags)
    }

    fn build(
        &mut self,
        c: u64,
        x: u64,
        h: usize,
        parent: Option<usize>,
        parents: &mut Vec<Option<usize>>,
        bags: &mut Vec<BTreeSet<usize>>,
    ) {
        self.best(c, x, h);
        let h = h.min(c.count_ones() as usize);
        let y = self.memo[&(c, x, h)].1;
        let me = parents.len();
        parents.push(parent);
        bags.push(bits(x | y).collect());
        for comp in components(self.adj, c & !y) {
            let att = neighbourhood(self.adj, comp);
            self.build(comp, att, h - 1, Some(me), parents, bags);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Brute-force width: all elimination orderings (twd), all layouts (pwd), or
/// all level assignments (twd_n). Intended for graphs with at most 8 vertices.
pub fn exhaustive_width(g: &Graph, mode: WidthMode, budget: usize) -> Result<isize> {
    let n = g.vertex_count();
    check_budget("vertices for exhaustive width", budget.min(9), n)?;
    if n == 0 {
        return Ok(-1);
    }
    let adj = g.masks();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = isize::MAX;
    match mode {
        WidthMode::Tree => loop {
            let mut fill = adj.clone();
            let mut remaining = (1u64 << n) - 1;
            let mut w = 0isize;
            for &v in &perm {
                remaining &= !(1 << v);
                let higher = fill[v] & remaining;
                w = w.max(higher.count_ones() as isize);
                for u in bits(higher) {
                    fill[u] |= higher & !(1 << u);
                }
            }
            best = best.min(w);
            if !next_permutation(&mut perm) {
                break;
            }
        },
        WidthMode::Path => loop {
            let mut placed = 0u64;
            let mut w = 0isize;
            for &v in &perm {
                placed |= 1 << v;
                let boundary = bits(placed).filter(|&u| adj[u] & !placed != 0).count();
                w = w.max(boundary as isize);
            }
            best = best.min(w);
            if !next_permutation(&mut perm) {
                break;
            }
        },
        WidthMode::Depth(0) => return Err(Error::Argument("height-0 decompositions do not exist".into())),
        WidthMode::Depth(h) => {
            let h = h.min(n);
            check_budget("level assignments", 5_000_000, h.pow(n as u32))?;
            let mut level = vec![0usize; n];
            loop {
                best = best.min(levelled_width(&adj, &level, h));
                let mut i = 0;
                while i < n && level[i] + 1 == h {
                    level[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                level[i] += 1;
            }
        }
    }
    Ok(best)
}

/// Width of the decomposition induced by a level assignment: root bag L_0,
/// and for each component K of G[L_≥i] (i ≥ 1) a bag (K ∩ L_i) ∪ N(K).
fn levelled_width(adj: &[u64], level: &[usize], h: usize) -> isize {
    let at = |i: usize| (0..adj.len()).filter(|&v| level[v] == i).fold(0u64, |m, v| m | 1 << v);
    let mut w = at(0).count_ones() as isize - 1;
    let mut upper = (1u64 << adj.len()) - 1 & !at(0);
    for i in 1..h {
        let li = at(i);
        for k in components(adj, upper) {
            let size = (k & li).count_ones() + neighbourhood(adj, k).count_ones();
            w = w.max(size as isize - 1);
        }
        upper &= !li;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn width(g: &Graph, mode: WidthMode) -> isize {
        let (w, d) = graph_width(g, mode, 12).unwrap();
        assert!(d.is_valid(g.structure()), "{mode} witness invalid");
        assert_eq!(d.width(), w);
        if let WidthMode::Depth(h) = mode {
            assert!(d.height() <= h);
        }
        if mode == WidthMode::Path {
            assert!((0..d.tree().len()).all(|v| d.tree().out_degree(v) <= 1));
        }
        w
    }

    #[test]
    fn small_values() {
        assert_eq!(width(&Graph::complete(3), WidthMode::Tree), 2);
        assert_eq!(width(&Graph::path(3), WidthMode::Path), 1);
        assert_eq!(width(&Graph::cycle(5), WidthMode::Tree), 2);
        assert_eq!(width(&Graph::grid(3, 3), WidthMode::Tree), 3);
        assert_eq!(width(&Graph::grid(3, 3), WidthMode::Path), 3);
        assert_eq!(width(&Graph::edgeless(3), WidthMode::Tree), 0);
        for g in [Graph::path(4), Graph::complete(4), Graph::cycle(6)] {
            assert_eq!(width(&g, WidthMode::Depth(1)), g.vertex_count() as isize - 1);
        }
    }

    #[test]
    fn depth_two_on_p4() {
        let g = Graph::path(3);
        let (w, d) = graph_width(&g, WidthMode::Depth(2), 10).unwrap();
        assert_eq!(w, 1);
        let names = |v: usize| -> Vec<&str> { d.bag(v).iter().map(|&a| g.name(a)).collect() };
        assert_eq!(names(0), ["v2", "v3"]);
        assert_eq!(d.tree().children(0).len(), 2);
        assert_eq!(names(1), ["v1", "v2"]);
        assert_eq!(names(2), ["v3", "v4"]);
    }

    #[test]
    fn modes_parse() {
        assert_eq!("twd_3".parse::<WidthMode>().unwrap(), WidthMode::Depth(3));
        assert_eq!("pwd".parse::<WidthMode>().unwrap(), WidthMode::Path);
        assert!("xyz".parse::<WidthMode>().is_err());
    }

    #[test]
    fn subsets_enumerated() {
        let mut seen = Vec::new();
        for_each_subset(0b10110, 2, |m| {
            seen.push(m);
            true
        });
        assert_eq!(seen, vec![0b00110, 0b10010, 0b10100]);
        let mut empty = Vec::new();
        for_each_subset(0b11, 0, |m| {
            empty.push(m);
            true
        });
        assert_eq!(empty, vec![0]);
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            graph_width(&Graph::path(11), WidthMode::Tree, 10),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn oracle_agrees_on_random_graphs() {
        let mut r = crate::random::rng(7);
        for i in 0..40 {
            let g = crate::random::random_graph(&mut r, 2 + i % 5, 0.45);
            for mode in [WidthMode::Tree, WidthMode::Path, WidthMode::Depth(2), WidthMode::Depth(3)] {
                assert_eq!(width(&g, mode), exhaustive_width(&g, mode, 8).unwrap(), "{mode}");
            }
        }
    }
}
