//! Finite relational structures over a named signature.
//!
//! Elements are opaque strings kept in lexicographic order; relations store
//! tuples of element indices into that order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A relation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }
}

/// Relation symbols (sorted by name) plus optional constant symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
    constants: Vec<String>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::from_symbols(symbols.into_iter().map(|(n, a)| Symbol::new(n, a)))
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Result<Self> {
        let mut symbols: Vec<Symbol> = symbols.into_iter().collect();
        symbols.sort();
        for w in symbols.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::Signature(format!("duplicate symbol {}", w[0].name)));
            }
        }
        if let Some(s) = symbols.iter().find(|s| s.arity == 0) {
            return Err(Error::Signature(format!("symbol {} has arity 0", s.name)));
        }
        Ok(Signature {
            symbols,
            constants: Vec::new(),
        })
    }

    pub fn with_constants<S: Into<String>>(mut self, constants: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut cs: Vec<String> = constants.into_iter().map(Into::into).collect();
        cs.sort();
        cs.dedup();
        if let Some(c) = cs.iter().find(|c| self.index_of(c).is_some()) {
            return Err(Error::Signature(format!("constant {c} clashes with a relation symbol")));
        }
        self.constants = cs;
        Ok(self)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols
            .binary_search_by(|s| s.name.as_str().cmp(name))
            .ok()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Union of two signatures; a symbol present in both must agree on arity.
    pub fn union(&self, other: &Signature) -> Result<Signature> {
        let mut merged: BTreeMap<&str, usize> = BTreeMap::new();
        for s in self.symbols.iter().chain(other.symbols.iter()) {
            match merged.get(s.name.as_str()) {
                Some(&a) if a != s.arity => {
                    return Err(Error::Signature(format!(
                        "symbol {} has arities {} and {}",
                        s.name, a, s.arity
                    )))
                }
                _ => {
                    merged.insert(&s.name, s.arity);
                }
            }
        }
        let sig = Signature::new(merged.into_iter())?;
        sig.with_constants(self.constants.iter().chain(other.constants.iter()).cloned())
    }

    /// Adds symbols that are not yet present.
    pub fn extended(&self, extra: impl IntoIterator<Item = Symbol>) -> Result<Signature> {
        let other = Signature::from_symbols(extra)?;
        self.union(&other)
    }
}

/// A finite relational structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    signature: Signature,
    domain: Vec<String>,
    relations: Vec<BTreeSet<Vec<usize>>>,
    constants: BTreeMap<String, usize>,
}

impl Structure {
    /// Creates a structure with empty relations.
    pub fn new<S: Into<String>>(signature: Signature, domain: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        domain.sort();
        for w in domain.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Structural(format!("duplicate element {}", w[0])));
            }
        }
        let relations = vec![BTreeSet::new(); signature.len()];
        Ok(Structure {
            signature,
            domain,
            relations,
            constants: BTreeMap::new(),
        })
    }

    /// Empty structure over the given signature.
    pub fn empty(signature: Signature) -> Self {
        let relations = vec![BTreeSet::new(); signature.len()];
        Structure {
            signature,
            domain: Vec::new(),
            relations,
            constants: BTreeMap::new(),
        }
    }

    /// Builds from a sorted domain and index-based relations; used internally
    /// where indices are already canonical.
    pub(crate) fn from_indexed(
        signature: Signature,
        domain: Vec<String>,
        relations: Vec<BTreeSet<Vec<usize>>>,
    ) -> Self {
        debug_assert!(domain.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(relations.len(), signature.len());
        Structure {
            signature,
            domain,
            relations,
            constants: BTreeMap::new(),
        }
    }

    /// Builds a structure from arbitrary (unsorted) names and relations whose
    /// tuples index into `names`.
    pub fn from_named(
        signature: Signature,
        names: Vec<String>,
        relations: Vec<BTreeSet<Vec<usize>>>,
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        let mut new_index = vec![0; names.len()];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old] = pos;
        }
        let domain: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
        for w in domain.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Structural(format!("duplicate element {}", w[0])));
            }
        }
        if relations.len() != signature.len() {
            return Err(Error::Structural("relation count does not match signature".into()));
        }
        let mut rels = Vec::with_capacity(relations.len());
        for (sym, tuples) in signature.symbols().iter().zip(relations) {
            let mut set = BTreeSet::new();
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(Error::Structural(format!(
                        "tuple of length {} in {}/{}",
                        t.len(),
                        sym.name,
                        sym.arity
                    )));
                }
                if t.iter().any(|&x| x >= names.len()) {
                    return Err(Error::Structural(format!("tuple outside the domain in {}", sym.name)));
                }
                set.insert(t.iter().map(|&x| new_index[x]).collect());
            }
            rels.push(set);
        }
        Ok(Structure {
            signature,
            domain,
            relations: rels,
            constants: BTreeMap::new(),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn element(&self, i: usize) -> &str {
        &self.domain[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.domain.binary_search_by(|e| e.as_str().cmp(name)).ok()
    }

    pub fn relations(&self) -> &[BTreeSet<Vec<usize>>] {
        &self.relations
    }

    pub fn relation_at(&self, i: usize) -> &BTreeSet<Vec<usize>> {
        &self.relations[i]
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    pub(crate) fn constants_mut(&mut self) -> &mut BTreeMap<String, usize> {
        &mut self.constants
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    pub fn holds(&self, name: &str, tuple: &[usize]) -> bool {
        self.relation(name).is_some_and(|r| r.contains(tuple))
    }

    pub fn add_tuple_idx(&mut self, rel: usize, tuple: Vec<usize>) -> Result<()> {
        let sym = self
            .signature
            .symbols()
            .get(rel)
            .ok_or_else(|| Error::Argument(format!("no relation with index {rel}")))?;
        if tuple.len() != sym.arity {
            return Err(Error::Structural(format!(
                "tuple of length {} in {}/{}",
                tuple.len(),
                sym.name,
                sym.arity
            )));
        }
        if tuple.iter().any(|&x| x >= self.domain.len()) {
            return Err(Error::Structural(format!("tuple outside the domain in {}", sym.name)));
        }
        self.relations[rel].insert(tuple);
        Ok(())
    }

    pub fn add_tuple(&mut self, rel: &str, tuple: &[&str]) -> Result<()> {
        let r = self
            .signature
            .index_of(rel)
            .ok_or_else(|| Error::Argument(format!("unknown relation {rel}")))?;
        let idx = tuple
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| Error::Structural(format!("element {n} not in the domain")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.add_tuple_idx(r, idx)
    }

    pub fn set_constant(&mut self, name: &str, element: &str) -> Result<()> {
        if !self.signature.constants().iter().any(|c| c == name) {
            return Err(Error::Argument(format!("unknown constant {name}")));
        }
        let e = self
            .index_of(element)
            .ok_or_else(|| Error::Structural(format!("element {element} not in the domain")))?;
        self.constants.insert(name.to_string(), e);
        Ok(())
    }

    /// Same elements and tuples over a larger signature (new relations empty).
    pub fn with_signature(&self, signature: &Signature) -> Result<Structure> {
        let mut out = Structure::new(signature.clone(), self.domain.iter().cloned())?;
        for (sym, tuples) in self.signature.symbols().iter().zip(&self.relations) {
            let r = signature.index_of(&sym.name).ok_or_else(|| {
                Error::Signature(format!("target signature lacks {}", sym.name))
            })?;
            if signature.symbols()[r].arity != sym.arity {
                return Err(Error::Signature(format!("arity of {} differs", sym.name)));
            }
            out.relations[r] = tuples.clone();
        }
        out.constants = self.constants.clone();
        Ok(out)
    }

    /// Expansion by additional relations given as index tuples.
    pub fn expanded(&self, extra: Vec<(Symbol, BTreeSet<Vec<usize>>)>) -> Result<Structure> {
        let sig = self.signature.extended(extra.iter().map(|(s, _)| s.clone()))?;
        let mut out = self.with_signature(&sig)?;
        for (sym, tuples) in extra {
            let r = sig.index_of(&sym.name).expect("extended signature");
            out.relations[r] = tuples;
        }
        Ok(out)
    }

    /// Substructure induced by the given element indices.
    pub fn induced(&self, keep: &[usize]) -> Structure {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut map = vec![usize::MAX; self.domain.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let domain = keep.iter().map(|&i| self.domain[i].clone()).collect();
        let relations = self
            .relations
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|t| t.iter().all(|&x| map[x] != usize::MAX))
                    .map(|t| t.iter().map(|&x| map[x]).collect())
                    .collect()
            })
            .collect();
        let mut out = Structure::from_indexed(self.signature.clone(), domain, relations);
        out.constants = self
            .constants
            .iter()
            .filter(|(_, &e)| map[e] != usize::MAX)
            .map(|(c, &e)| (c.clone(), map[e]))
            .collect();
        out
    }

    /// Renames every element; the map must be injective.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Result<Structure> {
        let names: Vec<String> = self.domain.iter().map(|e| f(e)).collect();
        let mut out = Structure::from_named(self.signature.clone(), names.clone(), self.relations.clone())?;
        for (c, &e) in &self.constants {
            let idx = out.index_of(&names[e]).expect("renamed element");
            out.constants.insert(c.clone(), idx);
        }
        Ok(out)
    }

    /// Disjoint union; elements are tagged `0.` and `1.`, and the signature is
    /// the union of both signatures with absent relations empty.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure> {
        let sig = self.signature.union(&other.signature)?;
        let mut names: Vec<String> = self.domain.iter().map(|e| format!("0.{e}")).collect();
        names.extend(other.domain.iter().map(|e| format!("1.{e}")));
        let n = self.domain.len();
        let mut rels = vec![BTreeSet::new(); sig.len()];
        for (part, offset) in [(self, 0usize), (other, n)] {
            for (sym, tuples) in part.signature.symbols().iter().zip(&part.relations) {
                let r = sig.index_of(&sym.name).expect("union signature");
                for t in tuples {
                    rels[r].insert(t.iter().map(|&x| x + offset).collect::<Vec<_>>());
                }
            }
        }
        let mut out = Structure::from_named(sig, names, rels)?;
        for (part, tag) in [(self, "0"), (other, "1")] {
            for (c, &e) in &part.constants {
                if !out.constants.contains_key(c) {
                    let idx = out
                        .index_of(&format!("{tag}.{}", part.domain[e]))
                        .expect("tagged element");
                    out.constants.insert(c.clone(), idx);
                }
            }
        }
        Ok(out)
    }

    /// The Gaifman graph: distinct elements are adjacent iff they occur
    /// together in some tuple.
    pub fn gaifman(&self) -> Graph {
        let mut edges = BTreeSet::new();
        for r in &self.relations {
            for t in r {
                for &u in t {
                    for &v in t {
                        if u != v {
                            edges.insert(vec![u, v]);
                        }
                    }
                }
            }
        }
        Graph::from_edge_set(self.domain.clone(), edges, false)
    }

    /// Checks that every relation has at most `k·|X|` tuples inside every
    /// subset X. Returns `None` when sparse and a violating `(subset,
    /// relation)` otherwise.
    ///
    /// Per relation this is a densest-subhypergraph question: the maximum of
    /// `|R ∩ X^r| − k|X|` equals the tuple count minus a minimum cut in the
    /// network source → tuple (1) → its elements (∞) → sink (k), and the
    /// source side of the cut is a maximising X.
    pub fn sparsity_violation(&self, k: usize) -> Option<(Vec<usize>, String)> {
        let n = self.len();
        for (sym, tuples) in self.signature.symbols().iter().zip(&self.relations) {
            if tuples.is_empty() {
                continue;
            }
            let t = tuples.len();
            let (source, sink) = (0, 1);
            let mut net = FlowNetwork::new(2 + t + n);
            for (i, tuple) in tuples.iter().enumerate() {
                net.add(source, 2 + i, 1);
                let mut elems = tuple.clone();
                elems.sort_unstable();
                elems.dedup();
                for e in elems {
                    net.add(2 + i, 2 + t + e, t + 1);
                }
            }
            for e in 0..n {
                net.add(2 + t + e, sink, k);
            }
            if net.max_flow(source, sink) < t {
                let reach = net.reachable(source);
                let subset = (0..n).filter(|&e| reach[2 + t + e]).collect();
                return Some((subset, sym.name.clone()));
            }
        }
        None
    }

    pub fn is_k_sparse(&self, k: usize) -> bool {
        self.sparsity_violation(k).is_none()
    }

    pub fn to_json(&self) -> StructureJson {
        StructureJson {
            signature: self.signature.symbols().to_vec(),
            constants: self
                .constants
                .iter()
                .map(|(c, &e)| (c.clone(), self.domain[e].clone()))
                .collect(),
            domain: self.domain.clone(),
            relations: self
                .signature
                .symbols()
                .iter()
                .zip(&self.relations)
                .map(|(s, ts)| {
                    (
                        s.name.clone(),
                        ts.iter()
                            .map(|t| t.iter().map(|&x| self.domain[x].clone()).collect())
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(json: &StructureJson) -> Result<Structure> {
        let sig = Signature::from_symbols(json.signature.iter().cloned())?
            .with_constants(json.constants.keys().cloned())?;
        let mut s = Structure::new(sig, json.domain.iter().cloned())?;
        for (name, tuples) in &json.relations {
            if s.signature.index_of(name).is_none() {
                return Err(Error::Format(format!("relation {name} not in the signature")));
            }
            for t in tuples {
                let t: Vec<&str> = t.iter().map(String::as_str).collect();
                s.add_tuple(name, &t)?;
            }
        }
        for (c, e) in &json.constants {
            s.set_constant(c, e)?;
        }
        Ok(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Structure> {
        let json: StructureJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Structure::from_json(&json)
    }
}

/// Serialized form of a [`Structure`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub signature: Vec<Symbol>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, String>,
    pub domain: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
}

/// Residual network for the sparsity check (Edmonds–Karp).
struct FlowNetwork {
    /// (target, residual capacity, index of the reverse edge)
    adj: Vec<Vec<(usize, usize, usize)>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, u: usize, v: usize, cap: usize) {
        let (ru, rv) = (self.adj[v].len(), self.adj[u].len());
        self.adj[u].push((v, cap, ru));
        self.adj[v].push((u, 0, rv));
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for (i, &(v, cap, _)) in self.adj[u].iter().enumerate() {
                    if cap > 0 && !seen[v] {
                        seen[v] = true;
                        prev[v] = Some((u, i));
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut push = usize::MAX;
            let mut v = t;
            while let Some((u, i)) = prev[v] {
                push = push.min(self.adj[u][i].1);
                v = u;
            }
            let mut v = t;
            while let Some((u, i)) = prev[v] {
                self.adj[u][i].1 -= push;
                let (w, _, r) = self.adj[u][i];
                self.adj[w][r].1 += push;
                v = u;
            }
            flow += push;
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, cap, _) in &self.adj[u] {
                if cap > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Structure {
        let sig = Signature::new([("R", 3)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b", "c", "d", "e"]).unwrap();
        for last in ["c", "d", "e"] {
            s.add_tuple("R", &["a", "b", last]).unwrap();
        }
        s
    }

    #[test]
    fn signature_rejects_duplicates_and_nullary() {
        assert!(Signature::new([("R", 2), ("R", 1)]).is_err());
        assert!(Signature::new([("R", 0)]).is_err());
        assert!(Signature::new([("R", 2)]).unwrap().union(&Signature::new([("R", 3)]).unwrap()).is_err());
    }

    #[test]
    fn tuple_validation() {
        let mut s = example();
        assert!(s.add_tuple("R", &["a", "b"]).is_err());
        assert!(s.add_tuple("R", &["a", "b", "z"]).is_err());
        assert!(s.add_tuple("Q", &["a"]).is_err());
    }

    #[test]
    fn gaifman_of_example_has_seven_edges() {
        let g = example().gaifman();
        assert_eq!(g.edge_count(), 7);
        for (u, v) in [("a", "b"), ("a", "c"), ("b", "c"), ("a", "d"), ("b", "d"), ("a", "e"), ("b", "e")] {
            assert!(g.adjacent_names(u, v));
        }
        assert!(!g.adjacent_names("c", "d"));
    }

    #[test]
    fn unary_only_gaifman_is_edgeless() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b"]).unwrap();
        s.add_tuple("P", &["a"]).unwrap();
        assert_eq!(s.gaifman().edge_count(), 0);
    }

    #[test]
    fn disjoint_union_counts() {
        let p2 = crate::graph::Graph::path(1);
        let u = p2.structure().disjoint_union(p2.structure()).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(u.relation("edg").unwrap().len(), 4);
        let empty = Structure::empty(Signature::default());
        let v = example().disjoint_union(&empty).unwrap();
        assert!(crate::iso::isomorphic(&v, &example()));
    }

    #[test]
    fn union_takes_union_signature() {
        let a = Structure::new(Signature::new([("P", 1)]).unwrap(), ["x"]).unwrap();
        let u = a.disjoint_union(&example()).unwrap();
        assert_eq!(u.signature().len(), 2);
        assert_eq!(u.len(), 6);
    }

    #[test]
    fn sparsity_of_triangle() {
        let k3 = crate::graph::Graph::complete(3);
        let v = k3.structure().sparsity_violation(1).unwrap();
        assert_eq!(v.0.len(), 3);
        assert!(k3.structure().is_k_sparse(2));
        assert!(Structure::empty(Signature::default()).is_k_sparse(0));
        assert!(crate::graph::Graph::path(40).structure().is_k_sparse(2));
    }

    /// Subset enumeration, for comparison with the flow formulation.
    fn sparse_by_subsets(s: &Structure, k: usize) -> bool {
        (0u64..1 << s.len()).all(|mask| {
            s.relations().iter().all(|ts| {
                let inside = ts.iter().filter(|t| t.iter().all(|&x| mask >> x & 1 == 1)).count();
                inside <= k * mask.count_ones() as usize
            })
        })
    }

    #[test]
    fn sparsity_matches_subset_enumeration() {
        let mut r = crate::random::rng(2);
        for i in 0..300 {
            let s = crate::random::random_structure(&mut r, 7, 3);
            let k = i % 3;
            let v = s.sparsity_violation(k);
            assert_eq!(v.is_none(), sparse_by_subsets(&s, k));
            if let Some((subset, rel)) = v {
                let mask = subset.iter().fold(0u64, |m, &x| m | 1 << x);
                let inside = s.relation(&rel).unwrap().iter().filter(|t| t.iter().all(|&x| mask >> x & 1 == 1)).count();
                assert!(inside > k * subset.len());
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = example();
        let text = s.to_json_string();
        assert_eq!(Structure::from_json_str(&text).unwrap(), s);
        let text = r#"{"signature":[{"name":"R","arity":3}], "domain":["a","b"], "relations":{"R":[["a","b","a"]]}}"#;
        let t = Structure::from_json_str(text).unwrap();
        assert_eq!(t.tuple_count(), 1);
    }
}
