//! Structures of bounded tree-width as labelled trees: every bag becomes an
//! index into a catalogue of small structures, every tree edge a partial
//! bijection between catalogue slots.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::decomposition::TreeDecomposition;
use crate::error::{check_budget, Error, Result};
use crate::graph::UnionFind;
use crate::incidence::{to_incidence, IncidenceStructure};
use crate::structure::{Signature, Structure, Symbol};
use crate::tree::{seq_string, ColouredTree, TreeDomain, TreeMode};

/// All structures over `sig` whose domain is a subset of `[k+1]`, in
/// canonical order: by domain size, then domain (as a sorted list), then the
/// relation bit string. The bit string lists, symbol by symbol, membership
/// of every tuple over the domain in lexicographic order; earlier bits are
/// more significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalogue {
    sig: Signature,
    k: usize,
    domains: Vec<Vec<usize>>,
}

impl Catalogue {
    pub fn new(sig: &Signature, k: usize) -> Result<Catalogue> {
        if !sig.constants().is_empty() {
            return Err(Error::Signature("catalogues are defined for relational signatures".into()));
        }
        check_budget("catalogue slots", 20, k + 1)?;
        let mut domains: Vec<Vec<usize>> = (0u32..1 << (k + 1))
            .map(|m| (0..=k).filter(|&i| m >> i & 1 == 1).collect())
            .collect();
        domains.sort_by(|a: &Vec<usize>, b| (a.len(), a).cmp(&(b.len(), b)));
        Ok(Catalogue {
            sig: sig.clone(),
            k,
            domains,
        })
    }

    pub fn slots(&self) -> usize {
        self.k + 1
    }

    fn bits(&self, d: usize) -> usize {
        self.sig.symbols().iter().map(|s| d.pow(s.arity as u32)).sum()
    }

    fn count(&self, d: usize) -> BigUint {
        BigUint::one() << self.bits(d)
    }

    pub fn len(&self) -> BigUint {
        self.domains.iter().map(|d| self.count(d.len())).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slot_name(&self, i: usize) -> String {
        let w = self.k.to_string().len();
        format!("{i:0w$}")
    }

    fn slot_of(&self, name: &str) -> Result<usize> {
        name.parse::<usize>()
            .ok()
            .filter(|&i| i <= self.k && self.slot_name(i) == name)
            .ok_or_else(|| Error::Argument(format!("{name:?} is not a slot of [{}]", self.k + 1)))
    }

    fn tuples(d: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
        let total = d.pow(arity as u32);
        (0..total).map(move |mut code| {
            let mut t = vec![0; arity];
            for slot in t.iter_mut().rev() {
                *slot = code % d.max(1);
                code /= d.max(1);
            }
            t
        })
    }

    /// Position of `c` in the catalogue; its element names must be slots.
    pub fn index_of(&self, c: &Structure) -> Result<BigUint> {
        if c.signature() != &self.sig {
            return Err(Error::Signature("structure is not over the catalogue signature".into()));
        }
        let dom: Vec<usize> = c.domain().iter().map(|x| self.slot_of(x)).collect::<Result<_>>()?;
        let mut idx = BigUint::zero();
        for d in &self.domains {
            if *d == dom {
                break;
            }
            idx += self.count(d.len());
        }
        let mut code = BigUint::zero();
        for (sym, rel) in self.sig.symbols().iter().zip(c.relations()) {
            for t in Self::tuples(dom.len(), sym.arity) {
                code <<= 1;
                if rel.contains(&t) {
                    code += 1u32;
                }
            }
        }
        Ok(idx + code)
    }

    pub fn entry(&self, index: &BigUint) -> Result<Structure> {
        let mut rest = index.clone();
        for d in &self.domains {
            let count = self.count(d.len());
            if rest >= count {
                rest -= count;
                continue;
            }
            let names: Vec<String> = d.iter().map(|&i| self.slot_name(i)).collect();
            let mut bit = self.bits(d.len());
            let mut rels = Vec::new();
            for sym in self.sig.symbols() {
                let mut set = BTreeSet::new();
                for t in Self::tuples(d.len(), sym.arity) {
                    bit -= 1;
                    if rest.bit(bit as u64) {
                        set.insert(t);
                    }
                }
                rels.push(set);
            }
            return Structure::from_named(self.sig.clone(), names, rels);
        }
        Err(Error::Argument(format!("catalogue index {index} out of range")))
    }

    /// The whole catalogue, for small signatures.
    pub fn enumerate(&self, budget: usize) -> Result<Vec<Structure>> {
        let len = self.len();
        let n: usize = usize::try_from(&len).ok().filter(|&n| n <= budget).ok_or_else(|| Error::Budget {
            what: "catalogue size",
            limit: budget,
            actual: usize::try_from(&len).unwrap_or(usize::MAX),
        })?;
        (0..n).map(|i| self.entry(&BigUint::from(i))).collect()
    }
}

/// A decomposition of width ≤ k stored as catalogue indices `λ(v)` and links
/// `R(parent(v), v)`; `links[root]` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionCode {
    pub tree: TreeDomain,
    pub k: usize,
    pub signature: Signature,
    pub lambda: Vec<BigUint>,
    pub links: Vec<BTreeSet<(usize, usize)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCodeJson {
    pub k: usize,
    pub signature: Vec<Symbol>,
    pub tree: Vec<String>,
    /// Catalogue indices in decimal, keyed by tree vertex.
    pub lambda: BTreeMap<String, String>,
    pub links: BTreeMap<String, Vec<(usize, usize)>>,
}

/// Encodes `d` with `π_v` mapping the bag `U_v`, in element order, onto
/// the first `|U_v|` slots.
pub fn decomposition_encode(a: &Structure, d: &TreeDecomposition, k: usize) -> Result<DecompositionCode> {
    d.require_valid(a)?;
    if d.width() > k as isize {
        return Err(Error::Argument(format!("decomposition has width {}, limit {k}", d.width())));
    }
    let cat = Catalogue::new(a.signature(), k)?;
    let t = d.tree();
    let pi: Vec<BTreeMap<usize, usize>> = d
        .bags()
        .iter()
        .map(|b| b.iter().enumerate().map(|(slot, &x)| (x, slot)).collect())
        .collect();
    let mut lambda = Vec::with_capacity(t.len());
    for (v, bag) in d.bags().iter().enumerate() {
        let keep: Vec<usize> = bag.iter().copied().collect();
        let sub = a.induced(&keep);
        let names: Vec<String> = keep.iter().map(|&x| cat.slot_name(pi[v][&x])).collect();
        let relabelled = sub.renamed(|name| {
            let x = a.index_of(name).expect("induced element");
            names[keep.binary_search(&x).expect("kept")].clone()
        })?;
        lambda.push(cat.index_of(&relabelled)?);
    }
    let links = (0..t.len())
        .map(|v| match t.parent(v) {
            None => BTreeSet::new(),
            Some(u) => d.bag(u)
                .intersection(d.bag(v))
                .map(|x| (pi[u][x], pi[v][x]))
                .collect(),
        })
        .collect();
    Ok(DecompositionCode {
        tree: t.clone(),
        k,
        signature: a.signature().clone(),
        lambda,
        links,
    })
}

impl DecompositionCode {
    /// Glues the catalogue pieces along the links; element `(v, i)` is named
    /// after the least vertex of its class.
    pub fn decode_structure(&self) -> Result<Structure> {
        let cat = Catalogue::new(&self.signature, self.k)?;
        let m = self.tree.len();
        if self.lambda.len() != m || self.links.len() != m {
            return Err(Error::Structural("one colour and one link set per tree vertex required".into()));
        }
        let pieces: Vec<Structure> = self.lambda.iter().map(|i| cat.entry(i)).collect::<Result<_>>()?;
        let slots = cat.slots();
        let slot_sets: Vec<Vec<usize>> = pieces
            .iter()
            .map(|p| p.domain().iter().map(|x| cat.slot_of(x)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let id = |v: usize, i: usize| v * slots + i;
        let mut uf = UnionFind::new(m * slots);
        if !self.links[0].is_empty() {
            return Err(Error::Structural("the root carries a link".into()));
        }
        for v in 1..m {
            let u = self.tree.parent(v).expect("non-root");
            let (mut firsts, mut seconds) = (BTreeSet::new(), BTreeSet::new());
            for &(i, j) in &self.links[v] {
                if !slot_sets[u].contains(&i) || !slot_sets[v].contains(&j) {
                    return Err(Error::Structural(format!(
                        "link ({i},{j}) into {:?} leaves the domains",
                        seq_string(self.tree.node(v))
                    )));
                }
                if !firsts.insert(i) || !seconds.insert(j) {
                    return Err(Error::Structural(format!(
                        "link into {:?} is not a partial bijection",
                        seq_string(self.tree.node(v))
                    )));
                }
                uf.union(id(u, i), id(v, j));
            }
        }
        let mut class_index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut names = Vec::new();
        let mut elem = vec![vec![0; slots]; m];
        for v in 0..m {
            for &i in &slot_sets[v] {
                let top = uf.find(id(v, i));
                let c = *class_index.entry(top).or_insert_with(|| {
                    names.push(format!("u{v}_{i}"));
                    names.len() - 1
                });
                elem[v][i] = c;
            }
        }
        let mut rels = vec![BTreeSet::new(); self.signature.len()];
        for (v, p) in pieces.iter().enumerate() {
            for (r, rel) in p.relations().iter().enumerate() {
                for t in rel {
                    rels[r].insert(t.iter().map(|&x| elem[v][slot_sets[v][x]]).collect::<Vec<_>>());
                }
            }
        }
        Structure::from_named(self.signature.clone(), names, rels)
    }

    pub fn decode(&self) -> Result<IncidenceStructure> {
        Ok(to_incidence(&self.decode_structure()?))
    }

    /// The code as an order tree coloured by the distinct catalogue indices
    /// (listed in the returned palette) followed by one colour per slot pair
    /// `(i, j)`, marking the vertices whose incoming link contains it.
    pub fn to_coloured_tree(&self) -> (ColouredTree, Vec<BigUint>) {
        let palette: Vec<BigUint> = self.lambda.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let slots = self.k + 1;
        let mut colours = vec![BTreeSet::new(); palette.len() + slots * slots];
        for (v, l) in self.lambda.iter().enumerate() {
            colours[palette.binary_search(l).expect("in palette")].insert(v);
            for &(i, j) in &self.links[v] {
                colours[palette.len() + i * slots + j].insert(v);
            }
        }
        let t = ColouredTree {
            domain: self.tree.clone(),
            mode: TreeMode::Order,
            colours,
        };
        (t, palette)
    }

    pub fn to_json(&self) -> DecompositionCodeJson {
        let names = self.tree.to_strings();
        DecompositionCodeJson {
            k: self.k,
            signature: self.signature.symbols().to_vec(),
            lambda: names.iter().cloned().zip(self.lambda.iter().map(|l| l.to_string())).collect(),
            links: names
                .iter()
                .cloned()
                .zip(&self.links)
                .filter(|(_, l)| !l.is_empty())
                .map(|(n, l)| (n, l.iter().copied().collect()))
                .collect(),
            tree: names,
        }
    }

    pub fn from_json(j: &DecompositionCodeJson) -> Result<DecompositionCode> {
        let tree = TreeDomain::from_strings(&j.tree)?;
        let names = tree.to_strings();
        let lambda = names
            .iter()
            .map(|n| {
                let text = j.lambda.get(n).ok_or_else(|| Error::Format(format!("no colour for vertex {n:?}")))?;
                text.parse::<BigUint>().map_err(|_| Error::Format(format!("bad catalogue index {text:?}")))
            })
            .collect::<Result<_>>()?;
        let links = names
            .iter()
            .map(|n| j.links.get(n).map(|l| l.iter().copied().collect()).unwrap_or_default())
            .collect();
        if let Some(n) = j.links.keys().chain(j.lambda.keys()).find(|n| !names.contains(n)) {
            return Err(Error::Format(format!("unknown tree vertex {n:?}")));
        }
        Ok(DecompositionCode {
            tree,
            k: j.k,
            signature: Signature::from_symbols(j.signature.clone())?,
            lambda,
            links,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::random_decomposition;
    use crate::iso::isomorphic;
    use crate::random::{random_structure, rng};

    fn example() -> Structure {
        let sig = Signature::new([("R", 3)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b", "c", "d", "e"]).unwrap();
        for x in ["c", "d", "e"] {
            s.add_tuple("R", &["a", "b", x]).unwrap();
        }
        s
    }

    #[test]
    fn catalogue_order_matches_enumeration() {
        let sig = Signature::new([("E", 1)]).unwrap();
        let cat = Catalogue::new(&sig, 1).unwrap();
        // {}, {0}, {1}, {0,1} with 1, 2, 2, 4 structures
        assert_eq!(cat.len(), BigUint::from(9u32));
        let all = cat.enumerate(100).unwrap();
        assert_eq!(all[0].len(), 0);
        assert_eq!((all[1].domain(), all[1].tuple_count()), (&["0".to_string()][..], 0));
        assert_eq!(all[2].tuple_count(), 1);
        assert_eq!(all[3].domain(), &["1".to_string()][..]);
        for (i, c) in all.iter().enumerate() {
            assert_eq!(cat.index_of(c).unwrap(), BigUint::from(i));
        }
        let bin = Catalogue::new(&Signature::new([("E", 2)]).unwrap(), 2).unwrap();
        // 1 + 3·2 + 3·2^4 + 2^9
        assert_eq!(bin.len(), BigUint::from(567u32));
        let all = bin.enumerate(1000).unwrap();
        let distinct: BTreeSet<_> = all.iter().map(|s| format!("{:?}", s)).collect();
        assert_eq!(distinct.len(), 567);
        assert!(bin.entry(&BigUint::from(567u32)).is_err());
    }

    #[test]
    fn example_path_decomposition() {
        let s = example();
        let bag = |xs: &[&str]| xs.iter().map(|x| s.index_of(x).unwrap()).collect::<BTreeSet<usize>>();
        let d = TreeDecomposition::new(
            TreeDomain::chain(3),
            vec![bag(&["a", "b", "c"]), bag(&["a", "b", "d"]), bag(&["a", "b", "e"])],
        )
        .unwrap();
        let code = decomposition_encode(&s, &d, 2).unwrap();
        assert_eq!(code.lambda.len(), 3);
        // all three bags carry the same catalogue structure
        assert!(code.lambda.iter().all(|l| *l == code.lambda[0]));
        assert!(code.links[0].is_empty());
        for v in 1..3 {
            assert_eq!(code.links[v], BTreeSet::from([(0, 0), (1, 1)]));
        }
        assert!(isomorphic(&code.decode().unwrap().structure, &to_incidence(&s).structure));
        assert!(matches!(decomposition_encode(&s, &d, 1), Err(Error::Argument(_))));
        let back = DecompositionCode::from_json(&code.to_json()).unwrap();
        assert_eq!(back, code);
        let (t, palette) = code.to_coloured_tree();
        assert_eq!(palette.len(), 1);
        assert_eq!(t.colours[1 + 0 * 3 + 0], BTreeSet::from([1, 2]));
    }

    #[test]
    fn single_bag() {
        let s = example();
        let d = TreeDecomposition::trivial(&s);
        let code = decomposition_encode(&s, &d, 4).unwrap();
        assert_eq!(code.tree.len(), 1);
        assert!(code.links.iter().all(BTreeSet::is_empty));
        assert!(isomorphic(&code.decode_structure().unwrap(), &s));
    }

    #[test]
    fn broken_links_rejected() {
        let s = example();
        let d = TreeDecomposition::new(TreeDomain::chain(2), vec![
            (0..5).collect(),
            (0..5).collect(),
        ])
        .unwrap();
        let mut code = decomposition_encode(&s, &d, 4).unwrap();
        code.links[1].insert((0, 1));
        assert!(matches!(code.decode(), Err(Error::Structural(_))));
        code.links[1] = BTreeSet::from([(0, 7)]);
        assert!(code.decode().is_err());
    }

    #[test]
    fn random_roundtrips() {
        let mut r = rng(8);
        let mut done = 0;
        while done < 100 {
            let s = random_structure(&mut r, 6, 3);
            let d = random_decomposition(&mut r, &s, 5);
            if d.width() > 3 {
                continue;
            }
            let code = decomposition_encode(&s, &d, 3).unwrap();
            let back = code.decode().unwrap();
            assert!(isomorphic(&back.structure, &to_incidence(&s).structure));
            done += 1;
        }
    }
}
