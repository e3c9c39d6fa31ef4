//! Rank-m types: hereditary sets of atomic types obtained by adding one set
//! parameter per rank. Two structures have equal types iff they satisfy the
//! same sentences of rank ≤ m with cardinality moduli ≤ q.

use std::collections::{BTreeSet, HashMap};

use crate::error::{check_budget, Result};
use crate::structure::{Signature, Structure};

#[derive(Clone, Copy, Debug)]
pub struct TypeOptions {
    pub max_domain: usize,
    pub max_rank: usize,
}

impl Default for TypeOptions {
    fn default() -> Self {
        TypeOptions {
            max_domain: 6,
            max_rank: 3,
        }
    }
}

/// Materialised rank type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankType {
    /// Truth values of the enumerated atoms over the parameters.
    Atomic(Vec<bool>),
    /// Types of all one-set extensions, one rank lower.
    Branch(BTreeSet<RankType>),
}

impl RankType {
    pub fn rank(&self) -> usize {
        match self {
            RankType::Atomic(_) => 0,
            RankType::Branch(s) => 1 + s.iter().map(RankType::rank).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Vec<u64>),
    Branch(Vec<u32>),
}

/// Interns types so that equality is a comparison of ids. Types are only
/// comparable within one context (same signature and modulus bound).
pub struct TypeContext {
    sig: Signature,
    q: usize,
    pub opts: TypeOptions,
    ids: HashMap<Node, u32>,
    nodes: Vec<Node>,
}

impl TypeContext {
    pub fn new(sig: &Signature, q: usize) -> Self {
        TypeContext {
            sig: sig.clone(),
            q,
            opts: TypeOptions::default(),
            ids: HashMap::new(),
            nodes: Vec::new(),
        }
    }

    pub fn with_options(mut self, opts: TypeOptions) -> Self {
        self.opts = opts;
        self
    }

    fn intern(&mut self, n: Node) -> u32 {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n.clone());
        self.ids.insert(n, i);
        i
    }

    /// Type id of `(s, params)` at rank `m`; constants of `s` act as leading
    /// parameters.
    pub fn type_id(&mut self, s: &Structure, params: &[u64], m: usize) -> Result<u32> {
        check_budget("domain size for types", self.opts.max_domain, s.len())?;
        check_budget("type rank", self.opts.max_rank, m)?;
        let rels: Vec<Vec<Vec<usize>>> = self
            .sig
            .symbols()
            .iter()
            .map(|sym| {
                s.relation(&sym.name)
                    .filter(|_| s.signature().arity(&sym.name) == Some(sym.arity))
                    .map(|r| r.iter().cloned().collect())
                    .unwrap_or_default()
            })
            .collect();
        let mut ps: Vec<u64> = s.constants().values().map(|&e| 1u64 << e).collect();
        ps.extend_from_slice(params);
        Ok(self.go(s.len(), &rels, &mut ps, m))
    }

    fn go(&mut self, n: usize, rels: &[Vec<Vec<usize>>], ps: &mut Vec<u64>, m: usize) -> u32 {
        if m == 0 {
            let bits = self.atoms(rels, ps);
            return self.intern(Node::Leaf(bits));
        }
        let mut kids = Vec::with_capacity(1 << n);
        ps.push(0);
        let last = ps.len() - 1;
        for x in 0..(1u64 << n) {
            ps[last] = x;
            kids.push(self.go(n, rels, ps, m - 1));
        }
        ps.pop();
        kids.sort_unstable();
        kids.dedup();
        self.intern(Node::Branch(kids))
    }

    fn atoms(&self, rels: &[Vec<Vec<usize>>], ps: &[u64]) -> Vec<u64> {
        let mut bits = BitSink::default();
        let v = ps.len();
        for i in 0..v {
            for j in 0..v {
                if i != j {
                    bits.push(ps[i] & !ps[j] == 0);
                }
            }
            bits.push(ps[i].count_ones() == 1);
            bits.push(ps[i] == 0);
            let c = ps[i].count_ones() as usize;
            for modulus in 2..=self.q {
                for r in 0..modulus {
                    bits.push(c % modulus == r);
                }
            }
        }
        for (sym, tuples) in self.sig.symbols().iter().zip(rels) {
            let total = v.pow(sym.arity as u32);
            for code in 0..total {
                let mut vars = Vec::with_capacity(sym.arity);
                let mut c = code;
                for _ in 0..sym.arity {
                    vars.push(c % v);
                    c /= v;
                }
                bits.push(
                    tuples
                        .iter()
                        .any(|t| t.iter().zip(&vars).all(|(&a, &x)| ps[x] >> a & 1 == 1)),
                );
            }
        }
        bits.words
    }

    pub fn materialize(&self, id: u32) -> RankType {
        match &self.nodes[id as usize] {
            Node::Leaf(words) => RankType::Atomic(
                words
                    .iter()
                    .skip(1)
                    .flat_map(|w| (0..64).map(move |i| w >> i & 1 == 1))
                    .take(words[0] as usize)
                    .collect(),
            ),
            Node::Branch(kids) => RankType::Branch(kids.iter().map(|&k| self.materialize(k)).collect()),
        }
    }
}

// first word stores the bit count so leaves of different lengths never collide
#[derive(Default)]
struct BitSink {
    words: Vec<u64>,
    len: usize,
}

impl BitSink {
    fn push(&mut self, b: bool) {
        if self.words.is_empty() {
            self.words.push(0);
        }
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if b {
            *self.words.last_mut().expect("word") |= 1 << (self.len % 64);
        }
        self.len += 1;
        self.words[0] = self.len as u64;
    }
}

/// The rank-`m` type of `s` with the given set parameters, moduli up to `q`.
pub fn mtype(s: &Structure, params: &[u64], m: usize, q: usize) -> Result<RankType> {
    let mut ctx = TypeContext::new(s.signature(), q);
    let id = ctx.type_id(s, params, m)?;
    Ok(ctx.materialize(id))
}

/// Equality of rank-`m` theories over the union signature.
pub fn theory_equal(a: &Structure, b: &Structure, m: usize, q: usize) -> Result<bool> {
    let sig = a.signature().union(b.signature())?;
    let mut ctx = TypeContext::new(&sig, q);
    Ok(ctx.type_id(a, &[], m)? == ctx.type_id(b, &[], m)?)
}
