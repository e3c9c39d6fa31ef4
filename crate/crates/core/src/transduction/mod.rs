//! Transductions: parameter expansion, k-fold copying, then a definition
//! scheme `(χ, δ, φ_R)`.

mod backwards;
mod compose;
pub mod library;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use backwards::{backwards, relativize, CopyEliminator, Loc};
pub use compose::compose;

use crate::error::{check_budget, Error, Result};
use crate::logic::{Compiled, EvalOptions, Formula};
use crate::structure::{Signature, Structure, Symbol};

pub const SIM: &str = "sim";

pub fn copy_symbol(i: usize) -> String {
    format!("copy{i}")
}

pub fn param_symbol(j: usize) -> String {
    format!("param{j}")
}

/// Formulas defining the output of a basic transduction. `phis` follows the
/// symbol order of `output`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitionScheme {
    pub output: Signature,
    pub chi: Formula,
    pub delta: (String, Formula),
    pub phis: Vec<(Vec<String>, Formula)>,
}

impl DefinitionScheme {
    /// `phi_R(x̄) = R x̄` for every output symbol, domain unrestricted.
    pub fn identity(sig: &Signature) -> Self {
        DefinitionScheme {
            output: sig.clone(),
            chi: Formula::True,
            delta: ("x".into(), Formula::True),
            phis: sig
                .symbols()
                .iter()
                .map(|s| {
                    let vars: Vec<String> = (0..s.arity).map(|i| format!("x{i}")).collect();
                    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
                    (vars.clone(), Formula::rel(&s.name, &refs))
                })
                .collect(),
        }
    }

    pub fn phi(&self, name: &str) -> Option<&(Vec<String>, Formula)> {
        self.output.index_of(name).map(|i| &self.phis[i])
    }
}

/// A k-copying transduction with p parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transduction {
    pub input: Signature,
    pub k: usize,
    pub p: usize,
    pub scheme: DefinitionScheme,
}

#[derive(Clone, Copy, Debug)]
pub struct ApplyOptions {
    /// Limit on `p·|A|`, the number of parameter bits enumerated.
    pub max_param_bits: usize,
    pub eval: EvalOptions,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        ApplyOptions {
            max_param_bits: 20,
            eval: EvalOptions::default(),
        }
    }
}

impl Transduction {
    pub fn new(input: Signature, k: usize, p: usize, scheme: DefinitionScheme) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("copy count must be at least 1".into()));
        }
        let t = Transduction { input, k, p, scheme };
        t.check()?;
        Ok(t)
    }

    pub fn identity(sig: &Signature) -> Self {
        Transduction {
            input: sig.clone(),
            k: 1,
            p: 0,
            scheme: DefinitionScheme::identity(sig),
        }
    }

    /// Input signature plus `sim`, `copy_i` (when k > 1) and `param_j`.
    pub fn enriched_signature(&self) -> Signature {
        enriched(&self.input, self.k, self.p)
    }

    /// Checks arities and free variables of all scheme formulas.
    pub fn check(&self) -> Result<()> {
        let sig = self.enriched_signature();
        let s = &self.scheme;
        if s.phis.len() != s.output.len() {
            return Err(Error::Signature("one formula per output symbol is required".into()));
        }
        let check_rels = |f: &Formula| -> Result<()> {
            let mut err = None;
            f.map_atoms(&mut |a| {
                if let Formula::Rel(r, xs) = a {
                    match sig.arity(r) {
                        Some(n) if n == xs.len() => {}
                        Some(n) => err = Some(Error::Signature(format!("{r} has arity {n}"))),
                        None => err = Some(Error::Signature(format!("{r} not in the enriched input signature"))),
                    }
                }
                a.clone()
            });
            err.map_or(Ok(()), Err)
        };
        check_rels(&s.chi)?;
        s.chi.check_scope(&[])?;
        check_rels(&s.delta.1)?;
        s.delta.1.check_scope(&[s.delta.0.as_str()])?;
        for ((vars, f), sym) in s.phis.iter().zip(s.output.symbols()) {
            if vars.len() != sym.arity {
                return Err(Error::Signature(format!(
                    "formula for {} has {} slots, arity {}",
                    sym.name,
                    vars.len(),
                    sym.arity
                )));
            }
            check_rels(f)?;
            let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
            f.check_scope(&refs)?;
        }
        Ok(())
    }

    /// `apply_basic(scheme, copy(expand(A, params), k))`.
    pub fn apply_with_params(&self, a: &Structure, params: &[u64], opts: &ApplyOptions) -> Result<Option<Structure>> {
        if params.len() != self.p {
            return Err(Error::Argument(format!("expected {} parameters", self.p)));
        }
        let expanded = expand(a, params)?;
        let copied = copy(&expanded, self.k)?;
        let b = copied.with_signature(&self.enriched_signature())?;
        apply_basic(&self.scheme, &b, opts.eval)
    }

    /// All defined outputs, in parameter order.
    pub fn apply(&self, a: &Structure, opts: &ApplyOptions) -> Result<Vec<Structure>> {
        let all = expansions(a.len(), self.p, opts.max_param_bits)?;
        if self.p == 0 {
            return Ok(self.apply_with_params(a, &[], opts)?.into_iter().collect());
        }
        // compile once over the copies with empty parameters, then swap the
        // parameter relations in for each choice
        let b = copy(&expand(a, &vec![0; self.p])?, self.k)?.with_signature(&self.enriched_signature())?;
        let slots: Vec<usize> = (0..self.p)
            .map(|j| b.signature().index_of(&param_symbol(j)).expect("parameter symbol"))
            .collect();
        // the copies of each element of A, as a mask over B
        let copies: Vec<u64> = (0..a.len())
            .map(|e| {
                if self.k == 1 {
                    return 1 << e;
                }
                (0..self.k).fold(0, |m, i| {
                    m | 1 << b.index_of(&format!("{}:{i}", a.element(e))).expect("copied element")
                })
            })
            .collect();
        let mut prepared = Prepared::new(&self.scheme, &b, opts.eval)?;
        let mut out = Vec::new();
        for params in all {
            for (&r, &m) in slots.iter().zip(&params) {
                let spread = (0..a.len()).filter(|&e| m >> e & 1 == 1).fold(0, |acc, e| acc | copies[e]);
                prepared.set_unary(r, spread);
            }
            if let Some(o) = prepared.run()? {
                out.push(o);
            }
        }
        Ok(out)
    }
}

pub(crate) fn enriched(input: &Signature, k: usize, p: usize) -> Signature {
    let mut extra = Vec::new();
    if k > 1 {
        extra.push(Symbol::new(SIM, 2));
        extra.extend((0..k).map(|i| Symbol::new(copy_symbol(i), 1)));
    }
    extra.extend((0..p).map(|j| Symbol::new(param_symbol(j), 1)));
    input.extended(extra).expect("reserved symbol names")
}

/// The disjoint union of k copies with `sim` and `copy_i`; identity for k = 1.
pub fn copy(a: &Structure, k: usize) -> Result<Structure> {
    if k == 0 {
        return Err(Error::Argument("copy count must be at least 1".into()));
    }
    if k == 1 {
        return Ok(a.clone());
    }
    let n = a.len();
    let names: Vec<String> = (0..n)
        .flat_map(|e| (0..k).map(move |i| (e, i)))
        .map(|(e, i)| format!("{}:{i}", a.element(e)))
        .collect();
    let id = |e: usize, i: usize| e * k + i;
    let mut extra = vec![Symbol::new(SIM, 2)];
    extra.extend((0..k).map(|i| Symbol::new(copy_symbol(i), 1)));
    let sig = a.signature().extended(extra)?;
    let mut rels = vec![BTreeSet::new(); sig.len()];
    for (sym, tuples) in a.signature().symbols().iter().zip(a.relations()) {
        let r = sig.index_of(&sym.name).expect("kept");
        for t in tuples {
            for i in 0..k {
                rels[r].insert(t.iter().map(|&e| id(e, i)).collect::<Vec<_>>());
            }
        }
    }
    let sim = sig.index_of(SIM).expect("sim");
    for e in 0..n {
        for i in 0..k {
            for j in 0..k {
                rels[sim].insert(vec![id(e, i), id(e, j)]);
            }
            let c = sig.index_of(&copy_symbol(i)).expect("copy");
            rels[c].insert(vec![id(e, i)]);
        }
    }
    let mut out = Structure::from_named(sig, names, rels)?;
    for (c, &e) in a.constants() {
        let idx = out.index_of(&format!("{}:0", a.element(e))).expect("copy 0");
        out.constants_mut().insert(c.clone(), idx);
    }
    Ok(out)
}

/// Expansion by the unary predicates `param_j`, given as bitmasks.
pub fn expand(a: &Structure, params: &[u64]) -> Result<Structure> {
    let extra = params
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let set = (0..a.len()).filter(|&e| m >> e & 1 == 1).map(|e| vec![e]).collect();
            (Symbol::new(param_symbol(j), 1), set)
        })
        .collect();
    a.expanded(extra)
}

/// All `2^{p·n}` parameter tuples, parameter 0 varying fastest.
pub fn expansions(n: usize, p: usize, max_bits: usize) -> Result<Vec<Vec<u64>>> {
    check_budget("parameter bits", max_bits, p * n)?;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Ok((0u64..(1u64 << (p * n)))
        .map(|code| (0..p).map(|j| (code >> (j * n)) & full).collect())
        .collect())
}

/// Applies a basic scheme; `None` when χ fails.
pub fn apply_basic(s: &DefinitionScheme, b: &Structure, opts: EvalOptions) -> Result<Option<Structure>> {
    Prepared::new(s, b, opts)?.run()
}

/// A scheme compiled against one structure.
struct Prepared<'a> {
    scheme: &'a DefinitionScheme,
    b: &'a Structure,
    chi: Compiled<'a>,
    delta: Compiled<'a>,
    phis: Vec<Compiled<'a>>,
}

impl<'a> Prepared<'a> {
    fn new(s: &'a DefinitionScheme, b: &'a Structure, opts: EvalOptions) -> Result<Self> {
        Ok(Prepared {
            scheme: s,
            b,
            chi: Compiled::new(b, &s.chi, &[], opts)?,
            delta: Compiled::new(b, &s.delta.1, &[s.delta.0.as_str()], opts)?,
            phis: s
                .phis
                .iter()
                .map(|(vars, f)| {
                    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
                    Compiled::new(b, f, &refs, opts)
                })
                .collect::<Result<_>>()?,
        })
    }

    fn set_unary(&mut self, r: usize, mask: u64) {
        self.chi.set_unary(r, mask);
        self.delta.set_unary(r, mask);
        self.phis.iter_mut().for_each(|c| c.set_unary(r, mask));
    }

    fn run(&self) -> Result<Option<Structure>> {
        if !self.chi.eval(&[])? {
            return Ok(None);
        }
        let mut dom = Vec::new();
        for e in 0..self.b.len() {
            if self.delta.eval(&[1 << e])? {
                dom.push(e);
            }
        }
        let mut rels = Vec::with_capacity(self.phis.len());
        for ((vars, _), c) in self.scheme.phis.iter().zip(&self.phis) {
            let mut set = BTreeSet::new();
            let r = vars.len();
            let total = dom.len().pow(r as u32);
            let mut vals = vec![0u64; r];
            let mut tuple = vec![0usize; r];
            for code in 0..total {
                let mut x = code;
                for i in 0..r {
                    tuple[i] = x % dom.len();
                    x /= dom.len();
                    vals[i] = 1 << dom[tuple[i]];
                }
                if c.eval(&vals)? {
                    set.insert(tuple.clone());
                }
            }
            rels.push(set);
        }
        let names = dom.iter().map(|&e| self.b.element(e).to_string()).collect();
        Ok(Some(Structure::from_named(self.scheme.output.clone(), names, rels)?))
    }
}

/// JSON form of a transduction, with formulas as s-expressions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransductionJson {
    pub input: Vec<Symbol>,
    pub output: Vec<Symbol>,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub p: usize,
    pub chi: String,
    pub delta: (String, String),
    pub phis: std::collections::BTreeMap<String, (Vec<String>, String)>,
}

fn one() -> usize {
    1
}

impl Transduction {
    pub fn to_json(&self) -> TransductionJson {
        TransductionJson {
            input: self.input.symbols().to_vec(),
            output: self.scheme.output.symbols().to_vec(),
            k: self.k,
            p: self.p,
            chi: self.scheme.chi.to_string(),
            delta: (self.scheme.delta.0.clone(), self.scheme.delta.1.to_string()),
            phis: self
                .scheme
                .output
                .symbols()
                .iter()
                .zip(&self.scheme.phis)
                .map(|(s, (v, f))| (s.name.clone(), (v.clone(), f.to_string())))
                .collect(),
        }
    }

    pub fn from_json(j: &TransductionJson) -> Result<Self> {
        let input = Signature::from_symbols(j.input.iter().cloned())?;
        let output = Signature::from_symbols(j.output.iter().cloned())?;
        let phis = output
            .symbols()
            .iter()
            .map(|s| {
                let (v, f) = j
                    .phis
                    .get(&s.name)
                    .ok_or_else(|| Error::Format(format!("no formula for {}", s.name)))?;
                Ok((v.clone(), f.parse()?))
            })
            .collect::<Result<_>>()?;
        let scheme = DefinitionScheme {
            output,
            chi: j.chi.parse()?,
            delta: (j.delta.0.clone(), j.delta.1.parse()?),
            phis,
        };
        Transduction::new(input, j.k, j.p, scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::iso::isomorphic;

    #[test]
    fn copies() {
        let one = Graph::edgeless(1);
        let c = copy(one.structure(), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.relation("copy0").unwrap().len(), 1);
        assert_eq!(c.relation(SIM).unwrap().len(), 4);
        assert_eq!(copy(one.structure(), 1).unwrap(), *one.structure());
        let k3 = copy(Graph::complete(3).structure(), 2).unwrap();
        assert_eq!(k3.len(), 6);
        assert_eq!(k3.relation("edg").unwrap().len(), 12);
        // three unordered pairs of distinct sim-related elements
        assert_eq!(k3.relation(SIM).unwrap().iter().filter(|t| t[0] < t[1]).count(), 3);
        assert!(copy(one.structure(), 0).is_err());
    }

    #[test]
    fn expansion_counts() {
        assert_eq!(expansions(5, 0, 20).unwrap(), vec![Vec::<u64>::new()]);
        assert_eq!(expansions(2, 1, 20).unwrap().len(), 4);
        assert_eq!(expansions(3, 2, 20).unwrap().len(), 64);
        assert!(expansions(11, 2, 20).is_err());
    }

    #[test]
    fn identity_and_complement() {
        let k3 = Graph::complete(3);
        let id = Transduction::identity(k3.structure().signature());
        let out = id.apply(k3.structure(), &ApplyOptions::default()).unwrap();
        assert_eq!(out, vec![k3.structure().clone()]);
        let c = library::complement();
        let out = c.apply(k3.structure(), &ApplyOptions::default()).unwrap();
        assert!(isomorphic(&out[0], Graph::edgeless(3).structure()));
    }

    #[test]
    fn false_chi_is_undefined() {
        let mut t = Transduction::identity(&crate::graph::edge_signature());
        t.scheme.chi = Formula::False;
        assert!(t.apply(Graph::path(2).structure(), &ApplyOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn doubler_on_path() {
        let t = library::doubler();
        let out = t.apply(Graph::path(2).structure(), &ApplyOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].len(), 6);
    }

    #[test]
    fn json_roundtrip() {
        for t in library::fixed() {
            let j = serde_json::to_string(&t.to_json()).unwrap();
            let back = Transduction::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn scheme_checks() {
        let mut t = library::complement();
        t.scheme.phis[0].1 = Formula::rel("foo", &["x0", "x1"]);
        assert!(matches!(t.check(), Err(Error::Signature(_))));
        let mut t = library::complement();
        t.scheme.phis[0].1 = Formula::rel("edg", &["x0", "z"]);
        assert!(matches!(t.check(), Err(Error::Scope(_))));
    }
}
