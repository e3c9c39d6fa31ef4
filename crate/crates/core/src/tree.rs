//! Tree domains (prefix-closed sets of sequences) and coloured trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{check_budget, Error, Result};
use crate::graph::Graph;
use crate::structure::{Signature, Structure, Symbol};

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A finite prefix-closed set of sequences, stored in lexicographic order
/// (which is also a preorder traversal).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeDomain {
    nodes: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl Default for TreeDomain {
    fn default() -> Self {
        TreeDomain::new(Vec::new()).expect("empty domain")
    }
}

impl TreeDomain {
    pub fn new(seqs: impl IntoIterator<Item = Vec<usize>>) -> Result<TreeDomain> {
        let set: BTreeSet<Vec<usize>> = seqs.into_iter().collect();
        for s in &set {
            if !s.is_empty() && !set.contains(&s[..s.len() - 1]) {
                return Err(Error::Structural(format!(
                    "tree domain not prefix closed at {}",
                    seq_string(s)
                )));
            }
        }
        let nodes: Vec<Vec<usize>> = set.into_iter().collect();
        let index: HashMap<&[usize], usize> =
            nodes.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let parent: Vec<Option<usize>> = nodes
            .iter()
            .map(|s| (!s.is_empty()).then(|| index[&s[..s.len() - 1]]))
            .collect();
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        Ok(TreeDomain {
            nodes,
            parent,
            children,
        })
    }

    /// Builds the canonical domain of a rooted tree given by a parent array.
    /// Children receive directions in increasing index order. Returns the
    /// domain and the map from input index to domain index.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<(TreeDomain, Vec<usize>)> {
        let n = parents.len();
        if n == 0 {
            return Ok((TreeDomain::default(), Vec::new()));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Structural(format!("expected one root, found {}", roots.len())));
        }
        let mut kids = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::Structural(format!("parent index {p} out of range")));
                }
                kids[p].push(i);
            }
        }
        let mut seq: Vec<Option<Vec<usize>>> = vec![None; n];
        seq[roots[0]] = Some(Vec::new());
        let mut stack = vec![roots[0]];
        while let Some(u) = stack.pop() {
            let base = seq[u].clone().expect("visited");
            for (d, &c) in kids[u].iter().enumerate() {
                let mut s = base.clone();
                s.push(d);
                seq[c] = Some(s);
                stack.push(c);
            }
        }
        let seqs: Vec<Vec<usize>> = seq
            .into_iter()
            .map(|s| s.ok_or_else(|| Error::Structural("parent array has a cycle".into())))
            .collect::<Result<_>>()?;
        let dom = TreeDomain::new(seqs.clone())?;
        let map = seqs.iter().map(|s| dom.index_of(s).expect("present")).collect();
        Ok((dom, map))
    }

    /// The complete m-ary tree domain `m^{<n}` of height n.
    pub fn complete(m: usize, n: usize) -> TreeDomain {
        let mut all = Vec::new();
        let mut layer = vec![Vec::new()];
        for _ in 0..n {
            all.extend(layer.iter().cloned());
            layer = layer
                .iter()
                .flat_map(|s| {
                    (0..m).map(move |d| {
                        let mut t = s.clone();
                        t.push(d);
                        t
                    })
                })
                .collect();
        }
        TreeDomain::new(all).expect("complete tree")
    }

    /// A chain of `h` vertices.
    pub fn chain(h: usize) -> TreeDomain {
        TreeDomain::new((0..h).map(|l| vec![0; l])).expect("chain")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        (!self.nodes.is_empty()).then_some(0)
    }

    pub fn node(&self, i: usize) -> &[usize] {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Vec<usize>] {
        &self.nodes
    }

    pub fn index_of(&self, seq: &[usize]) -> Option<usize> {
        self.nodes.binary_search_by(|s| s.as_slice().cmp(seq)).ok()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.children[i].len()
    }

    pub fn level(&self, i: usize) -> usize {
        self.nodes[i].len()
    }

    /// Number of levels: 0 for the empty domain, 1 for a single vertex.
    pub fn height(&self) -> usize {
        self.nodes.iter().map(|s| s.len() + 1).max().unwrap_or(0)
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// Prefix order.
    pub fn le(&self, u: usize, v: usize) -> bool {
        self.nodes[v].starts_with(&self.nodes[u])
    }

    pub fn infimum(&self, u: usize, v: usize) -> usize {
        let (a, b) = (&self.nodes[u], &self.nodes[v]);
        let k = a.iter().zip(b).take_while(|(x, y)| x == y).count();
        self.index_of(&a[..k]).expect("prefix closed")
    }

    /// Ancestors of `v` from the root down to and including `v`.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut p = vec![v];
        let mut cur = v;
        while let Some(u) = self.parent[cur] {
            p.push(u);
            cur = u;
        }
        p.reverse();
        p
    }

    /// All vertices `u` with `v ⪯ u`, in preorder.
    pub fn descendants(&self, v: usize) -> Vec<usize> {
        // lexicographic storage keeps each subtree contiguous
        let mut out = vec![v];
        let mut i = v + 1;
        while i < self.len() && self.le(v, i) {
            out.push(i);
            i += 1;
        }
        out
    }

    /// The subtree at `v` as a domain of its own.
    pub fn subtree(&self, v: usize) -> TreeDomain {
        let k = self.nodes[v].len();
        TreeDomain::new(self.descendants(v).into_iter().map(|u| self.nodes[u][k..].to_vec()))
            .expect("subtree")
    }

    /// Returns the common infimum `w` if all vertices share a level and every
    /// pairwise infimum equals `w`.
    pub fn horizontally_related(&self, vs: &[usize]) -> Option<usize> {
        let first = *vs.first()?;
        if vs.iter().any(|&v| self.level(v) != self.level(first)) {
            return None;
        }
        if vs.len() == 1 {
            return Some(first);
        }
        let w = self.infimum(vs[0], vs[1]);
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                if a == b || self.infimum(a, b) != w {
                    return None;
                }
            }
        }
        Some(w)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.nodes.iter().map(|s| seq_string(s)).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<TreeDomain> {
        let seqs = items
            .iter()
            .map(|s| parse_seq(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        TreeDomain::new(seqs)
    }

    /// Element names used when the domain becomes a structure: `t` + sequence.
    pub fn element_names(&self) -> Vec<String> {
        self.nodes.iter().map(|s| format!("t{}", seq_string(s))).collect()
    }

    /// The successor tree as an undirected graph.
    pub fn successor_graph(&self) -> Graph {
        let edges: Vec<(usize, usize)> = (0..self.len())
            .filter_map(|i| self.parent[i].map(|p| (p, i)))
            .collect();
        Graph::new(self.element_names(), &edges).expect("tree graph")
    }

    /// Canonical string of the unordered rooted tree; equal iff isomorphic.
    pub fn shape(&self) -> String {
        fn go(t: &TreeDomain, v: usize) -> String {
            let mut parts: Vec<String> = t.children[v].iter().map(|&c| go(t, c)).collect();
            parts.sort();
            format!("({})", parts.concat())
        }
        self.root().map_or_else(String::new, |r| go(self, r))
    }

    /// Searches an injective map `f` with `u ⪯ v ⇔ f(u) ⪯ f(v)`.
    pub fn embed_into(&self, host: &TreeDomain, budget: usize) -> Result<Option<Vec<usize>>> {
        check_budget("tree size for embedding", budget, self.len())?;
        if self.is_empty() {
            return Ok(Some(Vec::new()));
        }
        if host.is_empty() {
            return Ok(None);
        }
        let mut e = Embedder {
            s: self,
            t: host,
            memo: HashMap::new(),
        };
        let roots = 1u64;
        if !e.forest(roots, 0) {
            return Ok(None);
        }
        let mut f = vec![usize::MAX; self.len()];
        e.build_forest(roots, 0, &mut f);
        Ok(Some(f))
    }
}

pub(crate) fn seq_string(s: &[usize]) -> String {
    s.iter()
        .map(|&d| DIGITS.get(d).map_or('?', |&c| c as char))
        .collect()
}

fn parse_seq(s: &str) -> Result<Vec<usize>> {
    s.bytes()
        .map(|b| {
            DIGITS
                .iter()
                .position(|&c| c == b)
                .ok_or_else(|| Error::Format(format!("bad tree direction {:?}", b as char)))
        })
        .collect()
}

/// Order embedding search. `forest(c, t)` asks whether the sibling set `c`
/// (a bitmask of pattern vertices) embeds into the host subtree at `t` with
/// pairwise incomparable images.
struct Embedder<'a> {
    s: &'a TreeDomain,
    t: &'a TreeDomain,
    memo: HashMap<(u64, usize), bool>,
}

impl Embedder<'_> {
    fn kids_mask(&self, v: usize) -> u64 {
        self.s.children(v).iter().fold(0, |m, &c| m | 1 << c)
    }

    fn forest(&mut self, c: u64, t: usize) -> bool {
        if c == 0 {
            return true;
        }
        if let Some(&b) = self.memo.get(&(c, t)) {
            return b;
        }
        let mut ok = false;
        if c.count_ones() == 1 {
            let v = c.trailing_zeros() as usize;
            ok = self.children_fit(v, t);
        }
        if !ok {
            ok = self.spread(c, self.t.children(t).to_vec().as_slice());
        }
        self.memo.insert((c, t), ok);
        ok
    }

    // v placed at t: its children must embed strictly below t.
    fn children_fit(&mut self, v: usize, t: usize) -> bool {
        let km = self.kids_mask(v);
        km == 0 || self.spread(km, self.t.children(t).to_vec().as_slice())
    }

    // distribute the set c over the host subtrees rooted at `hosts`
    fn spread(&mut self, c: u64, hosts: &[usize]) -> bool {
        if c == 0 {
            return true;
        }
        let Some((&h, rest)) = hosts.split_first() else {
            return false;
        };
        let mut sub = c;
        loop {
            if self.forest(sub, h) && self.spread(c & !sub, rest) {
                return true;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & c;
        }
        false
    }

    fn build_forest(&mut self, c: u64, t: usize, f: &mut [usize]) {
        if c == 0 {
            return;
        }
        if c.count_ones() == 1 {
            let v = c.trailing_zeros() as usize;
            if self.children_fit(v, t) {
                f[v] = t;
                let km = self.kids_mask(v);
                let hosts = self.t.children(t).to_vec();
                self.build_spread(km, &hosts, f);
                return;
            }
        }
        let hosts = self.t.children(t).to_vec();
        self.build_spread(c, &hosts, f);
    }

    fn build_spread(&mut self, c: u64, hosts: &[usize], f: &mut [usize]) {
        if c == 0 {
            return;
        }
        let (&h, rest) = hosts.split_first().expect("feasible spread");
        let mut sub = c;
        loop {
            if self.forest(sub, h) && self.spread(c & !sub, rest) {
                self.build_forest(sub, h, f);
                self.build_spread(c & !sub, rest, f);
                return;
            }
            sub = (sub - 1) & c;
        }
    }
}

/// Whether a coloured tree carries the order `⪯` or the parent-child relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeMode {
    Order,
    Successor,
}

/// A tree domain expanded by (possibly overlapping) colour sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColouredTree {
    pub domain: TreeDomain,
    pub mode: TreeMode,
    pub colours: Vec<BTreeSet<usize>>,
}

pub const ORDER: &str = "le";
pub const SUCC: &str = "edg";

pub fn colour_name(i: usize) -> String {
    format!("C{i}")
}

impl ColouredTree {
    pub fn plain(domain: TreeDomain, mode: TreeMode) -> Self {
        ColouredTree {
            domain,
            mode,
            colours: Vec::new(),
        }
    }

    pub fn signature(mode: TreeMode, colours: usize) -> Signature {
        let base = match mode {
            TreeMode::Order => Symbol::new(ORDER, 2),
            TreeMode::Successor => Symbol::new(SUCC, 2),
        };
        Signature::from_symbols(
            std::iter::once(base).chain((0..colours).map(|i| Symbol::new(colour_name(i), 1))),
        )
        .expect("tree signature")
    }

    pub fn convert(&self, mode: TreeMode) -> ColouredTree {
        ColouredTree {
            mode,
            ..self.clone()
        }
    }

    /// The tree as a relational structure; successor mode stores directed
    /// parent→child pairs.
    pub fn to_structure(&self) -> Structure {
        let d = &self.domain;
        let sig = Self::signature(self.mode, self.colours.len());
        let mut rels = vec![BTreeSet::new(); sig.len()];
        let base = sig
            .index_of(match self.mode {
                TreeMode::Order => ORDER,
                TreeMode::Successor => SUCC,
            })
            .expect("base symbol");
        for v in 0..d.len() {
            match self.mode {
                TreeMode::Order => {
                    for u in d.path_to(v) {
                        rels[base].insert(vec![u, v]);
                    }
                }
                TreeMode::Successor => {
                    if let Some(p) = d.parent(v) {
                        rels[base].insert(vec![p, v]);
                    }
                }
            }
        }
        for (i, c) in self.colours.iter().enumerate() {
            let r = sig.index_of(&colour_name(i)).expect("colour symbol");
            rels[r] = c.iter().map(|&v| vec![v]).collect();
        }
        Structure::from_named(sig, d.element_names(), rels).expect("tree structure")
    }

    /// Recovers a coloured tree from a structure over the tree signature.
    /// Children are ordered by element order; the result is canonical.
    pub fn from_structure(s: &Structure, mode: TreeMode) -> Result<ColouredTree> {
        let n = s.len();
        let mut parents: Vec<Option<usize>> = vec![None; n];
        match mode {
            TreeMode::Successor => {
                let r = s.relation(SUCC).ok_or_else(|| Error::Signature("missing edg".into()))?;
                for t in r {
                    if parents[t[1]].replace(t[0]).is_some() {
                        return Err(Error::Structural(format!("{} has two parents", s.element(t[1]))));
                    }
                }
            }
            TreeMode::Order => {
                let r = s.relation(ORDER).ok_or_else(|| Error::Signature("missing le".into()))?;
                let mut below: Vec<Vec<usize>> = vec![Vec::new(); n];
                for t in r {
                    if t[0] != t[1] {
                        below[t[1]].push(t[0]);
                    }
                }
                for v in 0..n {
                    // the parent is the strict predecessor with the most predecessors
                    parents[v] = below[v].iter().copied().max_by_key(|&u| below[u].len());
                }
            }
        }
        let (domain, map) = TreeDomain::from_parents(&parents)?;
        let mut colours = Vec::new();
        let mut i = 0;
        while let Some(r) = s.relation(&colour_name(i)) {
            colours.push(r.iter().map(|t| map[t[0]]).collect());
            i += 1;
        }
        let out = ColouredTree {
            domain,
            mode,
            colours,
        };
        if mode == TreeMode::Order {
            let back = out.to_structure();
            let r = s.relation(ORDER).expect("checked");
            if back.relation(ORDER).expect("order").len() != r.len() {
                return Err(Error::Structural("relation is not a tree order".into()));
            }
        }
        Ok(out)
    }
}

/// Enumerates all rooted unordered trees with exactly `n` vertices, up to
/// isomorphism, as canonical domains.
pub fn all_trees(n: usize) -> Vec<TreeDomain> {
    fn build(n: usize, memo: &mut BTreeMap<usize, Vec<String>>) -> Vec<String> {
        // trees as canonical bracket strings
        if let Some(v) = memo.get(&n) {
            return v.clone();
        }
        let mut out = BTreeSet::new();
        if n == 1 {
            out.insert("()".to_string());
        } else {
            for parts in partitions(n - 1) {
                let mut acc: Vec<Vec<String>> = vec![Vec::new()];
                for p in parts {
                    let opts = build(p, memo);
                    acc = acc
                        .into_iter()
                        .flat_map(|a| {
                            opts.iter().map(move |o| {
                                let mut b = a.clone();
                                b.push(o.clone());
                                b
                            })
                        })
                        .collect();
                }
                for mut kids in acc {
                    kids.sort();
                    out.insert(format!("({})", kids.concat()));
                }
            }
        }
        let v: Vec<String> = out.into_iter().collect();
        memo.insert(n, v.clone());
        v
    }
    fn partitions(n: usize) -> Vec<Vec<usize>> {
        fn go(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if n == 0 {
                out.push(cur.clone());
                return;
            }
            for p in (1..=n.min(max)).rev() {
                cur.push(p);
                go(n - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(n, n, &mut Vec::new(), &mut out);
        out
    }
    if n == 0 {
        return vec![TreeDomain::default()];
    }
    let mut memo = BTreeMap::new();
    build(n, &mut memo)
        .into_iter()
        .map(|code| {
            let mut parents = Vec::new();
            let mut stack: Vec<usize> = Vec::new();
            for ch in code.chars() {
                if ch == '(' {
                    parents.push(stack.last().copied());
                    stack.push(parents.len() - 1);
                } else {
                    stack.pop();
                }
            }
            TreeDomain::from_parents(&parents).expect("bracket tree").0
        })
        .collect()
}
