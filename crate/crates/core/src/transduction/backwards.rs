//! Backwards translation: a sentence about the output of a transduction
//! becomes a sentence about its input.
//!
//! Two passes. [`relativize`] works on the copied, expanded structure: it
//! restricts quantifiers to the domain formula and replaces output atoms by
//! their defining formulas. [`CopyEliminator`] then removes copies by
//! splitting each set variable `X` into `X^0 .. X^{k-1}`, and replaces the
//! parameter predicates by quantified set variables.

use std::collections::{BTreeMap, BTreeSet};

use super::{copy_symbol, param_symbol, DefinitionScheme, Transduction, SIM};
use crate::error::{Error, Result};
use crate::logic::{fresh_name, Formula};

/// Desugared copy of a scheme.
pub(crate) fn desugared(s: &DefinitionScheme) -> DefinitionScheme {
    DefinitionScheme {
        output: s.output.clone(),
        chi: s.chi.desugar_unchecked(),
        delta: (s.delta.0.clone(), s.delta.1.desugar_unchecked()),
        phis: s
            .phis
            .iter()
            .map(|(v, f)| (v.clone(), f.desugar_unchecked()))
            .collect(),
    }
}

pub(crate) fn scheme_vars(s: &DefinitionScheme) -> BTreeSet<String> {
    let mut out = s.chi.all_vars();
    out.insert(s.delta.0.clone());
    out.extend(s.delta.1.all_vars());
    for (v, f) in &s.phis {
        out.extend(v.iter().cloned());
        out.extend(f.all_vars());
    }
    out
}

fn guarded_exists(x: &str, body: &Formula) -> bool {
    matches!(body, Formula::And(cs) if cs.iter().any(|c| matches!(c, Formula::Sing(y) if y == x)))
}

fn guarded_forall(x: &str, body: &Formula) -> bool {
    matches!(body, Formula::Or(cs) if cs.iter().any(|c| matches!(c, Formula::Not(b) if matches!(&**b, Formula::Sing(y) if y == x))))
}

/// Rewrites `phi` (over the scheme's output signature) into a formula over the
/// enriched input signature. Symbols in `passthrough` are kept as they are.
/// `singletons` lists free variables known to denote single elements.
pub fn relativize(
    phi: &Formula,
    scheme: &DefinitionScheme,
    passthrough: &[String],
    singletons: &[String],
    avoid: &mut BTreeSet<String>,
) -> Result<Formula> {
    let scheme = desugared(scheme);
    avoid.extend(phi.all_vars());
    avoid.extend(scheme_vars(&scheme));
    let mut r = Relativizer {
        scheme: &scheme,
        passthrough,
        avoid,
    };
    let mut scope: Vec<(String, bool)> = singletons.iter().map(|s| (s.clone(), true)).collect();
    r.go(&phi.desugar_unchecked(), &mut scope)
}

struct Relativizer<'a> {
    scheme: &'a DefinitionScheme,
    passthrough: &'a [String],
    avoid: &'a mut BTreeSet<String>,
}

impl Relativizer<'_> {
    fn delta_at(&self, x: &str) -> Formula {
        let (v, d) = &self.scheme.delta;
        d.rename(&[(v.clone(), x.to_string())])
    }

    // X ⊆ D, or nothing when the domain formula is trivially true
    fn guard(&mut self, x: &str) -> Formula {
        if self.scheme.delta.1 == Formula::True {
            return Formula::True;
        }
        let y = fresh_name("y", self.avoid);
        Formula::forall(
            &y,
            Formula::or([
                Formula::not(Formula::sing(&y)),
                Formula::not(Formula::sub(&y, x)),
                self.delta_at(&y),
            ]),
        )
    }

    fn go(&mut self, f: &Formula, scope: &mut Vec<(String, bool)>) -> Result<Formula> {
        use Formula::*;
        Ok(match f {
            Rel(r, zs) => self.atom(r, zs, scope)?,
            Not(g) => Formula::not(self.go(g, scope)?),
            And(gs) => And(gs.iter().map(|g| self.go(g, scope)).collect::<Result<_>>()?),
            Or(gs) => Or(gs.iter().map(|g| self.go(g, scope)).collect::<Result<_>>()?),
            Exists(x, body) => {
                let guarded = guarded_exists(x, body);
                scope.push((x.clone(), guarded));
                let b = self.go(body, scope);
                scope.pop();
                let b = b?;
                if guarded {
                    Formula::exists(x, Formula::conj([b, self.delta_at(x)]))
                } else {
                    Formula::exists(x, Formula::conj([self.guard(x), b]))
                }
            }
            Forall(x, body) => {
                let guarded = guarded_forall(x, body);
                scope.push((x.clone(), guarded));
                let b = self.go(body, scope);
                scope.pop();
                let b = b?;
                if guarded {
                    Formula::forall(x, Formula::disj([b, Formula::negate(self.delta_at(x))]))
                } else {
                    Formula::forall(x, Formula::disj([Formula::negate(self.guard(x)), b]))
                }
            }
            ExistsF(..) | ForallF(..) => self.go(&f.desugar_unchecked(), scope)?,
            atom => atom.clone(),
        })
    }

    fn atom(&mut self, r: &str, zs: &[String], scope: &[(String, bool)]) -> Result<Formula> {
        if self.passthrough.iter().any(|p| p == r) {
            return Ok(Formula::Rel(r.to_string(), zs.to_vec()));
        }
        let (vars, phi) = self
            .scheme
            .phi(r)
            .ok_or_else(|| Error::Signature(format!("{r} is not an output symbol")))?
            .clone();
        if vars.len() != zs.len() {
            return Err(Error::Signature(format!("{r} used with {} arguments", zs.len())));
        }
        // R x̄ defined by a single atom over a permutation of x̄ translates directly
        if let Formula::Rel(s, ys) = &phi {
            let distinct: BTreeSet<&String> = ys.iter().collect();
            if ys.len() == vars.len() && distinct.len() == ys.len() && ys.iter().all(|y| vars.contains(y)) {
                let args = ys
                    .iter()
                    .map(|y| zs[vars.iter().position(|v| v == y).expect("member")].clone())
                    .collect();
                return Ok(Formula::Rel(s.clone(), args));
            }
        }
        let single = |z: &str| scope.iter().rev().find(|(n, _)| n == z).is_some_and(|&(_, s)| s);
        let mut map = Vec::new();
        let mut fresh = Vec::new();
        for (x, z) in vars.iter().zip(zs) {
            if single(z) {
                map.push((x.clone(), z.clone()));
            } else {
                let e = fresh_name("z", self.avoid);
                map.push((x.clone(), e.clone()));
                fresh.push((e, z.clone()));
            }
        }
        let mut out = phi.rename(&map);
        for (e, z) in fresh.into_iter().rev() {
            out = Formula::exists(&e, Formula::conj([Formula::sing(&e), Formula::sub(&e, &z), out]));
        }
        Ok(out)
    }
}

/// Where a variable of the copied structure lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    /// An arbitrary set, split into one component per copy.
    Split,
    /// A single element inside the given copy.
    At(usize),
}

/// Translates formulas over `copy_k(A)` into formulas over `A`.
pub struct CopyEliminator {
    pub k: usize,
    /// Unary symbols interpreted differently in each copy: copy `i` reads the
    /// `i`-th listed symbol of `A`.
    pub varying: BTreeMap<String, Vec<String>>,
    /// When set, `param_j` atoms are replaced by membership in these set
    /// variables.
    pub params: Option<Vec<String>>,
    pub avoid: BTreeSet<String>,
}

impl CopyEliminator {
    pub fn new(k: usize, avoid: BTreeSet<String>) -> Self {
        CopyEliminator {
            k,
            varying: BTreeMap::new(),
            params: None,
            avoid,
        }
    }

    /// Component name for copy `i` of a variable.
    pub fn component(&self, x: &str, i: usize) -> String {
        if self.k == 1 {
            x.to_string()
        } else {
            format!("{x}^{i}")
        }
    }

    fn comp(&self, x: &str, i: usize, env: &[(String, Loc)]) -> Result<Option<(String, bool)>> {
        let loc = env
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|&(_, l)| l)
            .ok_or_else(|| Error::Scope(format!("unbound variable {x}")))?;
        Ok(match loc {
            Loc::Split => Some((self.component(x, i), false)),
            Loc::At(j) if j == i => Some((self.component(x, i), true)),
            Loc::At(_) => None,
        })
    }

    // W ∩ V ≠ ∅
    fn meets(&mut self, a: &(String, bool), b: &(String, bool)) -> Formula {
        if a.1 {
            Formula::sub(&a.0, &b.0)
        } else if b.1 {
            Formula::sub(&b.0, &a.0)
        } else {
            let z = fresh_name("w", &mut self.avoid);
            Formula::exists(
                &z,
                Formula::and([Formula::sing(&z), Formula::sub(&z, &a.0), Formula::sub(&z, &b.0)]),
            )
        }
    }

    pub fn elim(&mut self, f: &Formula, env: &mut Vec<(String, Loc)>) -> Result<Formula> {
        use Formula::*;
        let k = self.k;
        Ok(match f {
            True => True,
            False => False,
            Sub(x, y) => {
                let mut parts = Vec::new();
                for i in 0..k {
                    match (self.comp(x, i, env)?, self.comp(y, i, env)?) {
                        (None, _) => {}
                        (Some((a, _)), None) => parts.push(Formula::empty(&a)),
                        (Some((a, _)), Some((b, _))) => parts.push(Formula::sub(&a, &b)),
                    }
                }
                Formula::conj(parts)
            }
            Empty(x) => {
                let mut parts = Vec::new();
                for i in 0..k {
                    if let Some((a, s)) = self.comp(x, i, env)? {
                        parts.push(if s { False } else { Formula::empty(&a) });
                    }
                }
                Formula::conj(parts)
            }
            Sing(x) => {
                let comps: Vec<Option<(String, bool)>> =
                    (0..k).map(|i| self.comp(x, i, env)).collect::<Result<_>>()?;
                if comps.iter().flatten().any(|(_, s)| *s) {
                    True
                } else {
                    Formula::disj((0..k).map(|i| {
                        Formula::conj((0..k).map(|j| {
                            let n = &comps[j].as_ref().expect("split").0;
                            if i == j {
                                Formula::sing(n)
                            } else {
                                Formula::empty(n)
                            }
                        }))
                    }))
                }
            }
            Card(x, r, m) => {
                let comps: Vec<Option<(String, bool)>> =
                    (0..k).map(|i| self.comp(x, i, env)).collect::<Result<_>>()?;
                if comps.iter().flatten().any(|(_, s)| *s) {
                    if 1 % m == *r {
                        True
                    } else {
                        False
                    }
                } else if k == 1 {
                    Formula::card(&comps[0].as_ref().expect("split").0, *r, *m)
                } else {
                    let mut alts = Vec::new();
                    let total = m.pow(k as u32);
                    for code in 0..total {
                        let mut c = code;
                        let rs: Vec<usize> = (0..k)
                            .map(|_| {
                                let v = c % m;
                                c /= m;
                                v
                            })
                            .collect();
                        if rs.iter().sum::<usize>() % m == *r {
                            alts.push(Formula::conj(
                                rs.iter()
                                    .zip(&comps)
                                    .map(|(&ri, c)| Formula::card(&c.as_ref().expect("split").0, ri, *m)),
                            ));
                        }
                    }
                    Formula::disj(alts)
                }
            }
            Rel(r, zs) => self.rel(r, zs, env)?,
            Not(g) => Formula::negate(self.elim(g, env)?),
            And(gs) => Formula::conj(gs.iter().map(|g| self.elim(g, env)).collect::<Result<Vec<_>>>()?),
            Or(gs) => Formula::disj(gs.iter().map(|g| self.elim(g, env)).collect::<Result<Vec<_>>>()?),
            Exists(x, body) | Forall(x, body) => {
                let exists = matches!(f, Exists(..));
                let guarded = if exists { guarded_exists(x, body) } else { guarded_forall(x, body) };
                if guarded {
                    let mut alts = Vec::new();
                    for i in 0..k {
                        env.push((x.clone(), Loc::At(i)));
                        let b = self.elim(body, env);
                        env.pop();
                        let b = b?;
                        let n = self.component(x, i);
                        alts.push(if exists {
                            Formula::exists(&n, Formula::conj([Formula::sing(&n), b]))
                        } else {
                            Formula::forall(&n, Formula::disj([Formula::not(Formula::sing(&n)), b]))
                        });
                    }
                    if exists {
                        Formula::disj(alts)
                    } else {
                        Formula::conj(alts)
                    }
                } else {
                    env.push((x.clone(), Loc::Split));
                    let b = self.elim(body, env);
                    env.pop();
                    let mut out = b?;
                    for i in (0..k).rev() {
                        let n = self.component(x, i);
                        out = if exists {
                            Formula::exists(&n, out)
                        } else {
                            Formula::forall(&n, out)
                        };
                    }
                    out
                }
            }
            ExistsF(..) | ForallF(..) => self.elim(&f.desugar_unchecked(), env)?,
        })
    }

    fn rel(&mut self, r: &str, zs: &[String], env: &[(String, Loc)]) -> Result<Formula> {
        let k = self.k;
        if k > 1 && r == SIM {
            let mut alts = Vec::new();
            for i in 0..k {
                for j in 0..k {
                    if let (Some(a), Some(b)) = (self.comp(&zs[0], i, env)?, self.comp(&zs[1], j, env)?) {
                        alts.push(self.meets(&a, &b));
                    }
                }
            }
            return Ok(Formula::disj(alts));
        }
        if k > 1 {
            if let Some(c) = (0..k).find(|&c| copy_symbol(c) == r) {
                return Ok(match self.comp(&zs[0], c, env)? {
                    Some((_, true)) => Formula::True,
                    Some((n, false)) => Formula::not(Formula::empty(&n)),
                    None => Formula::False,
                });
            }
        }
        if let Some(names) = self.varying.get(r).cloned() {
            let mut alts = Vec::new();
            for (i, name) in names.iter().enumerate() {
                if let Some((n, _)) = self.comp(&zs[0], i, env)? {
                    alts.push(Formula::rel(name, &[&n]));
                }
            }
            return Ok(Formula::disj(alts));
        }
        let param = self
            .params
            .as_ref()
            .and_then(|ps| (0..ps.len()).find(|&j| param_symbol(j) == r).map(|j| ps[j].clone()));
        let mut alts = Vec::new();
        for i in 0..k {
            let comps: Option<Vec<(String, bool)>> = zs
                .iter()
                .map(|z| self.comp(z, i, env))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .collect();
            let Some(comps) = comps else { continue };
            match &param {
                Some(q) => alts.push(self.meets(&comps[0], &(q.clone(), false))),
                None => alts.push(Formula::Rel(r.to_string(), comps.into_iter().map(|c| c.0).collect())),
            }
        }
        Ok(Formula::disj(alts))
    }
}

/// `φ^τ`: holds in `A` iff some output of `τ` on `A` satisfies `φ`.
pub fn backwards(t: &Transduction, phi: &Formula) -> Result<Formula> {
    phi.check_scope(&[])?;
    for r in phi.relations() {
        if t.scheme.output.index_of(&r).is_none() {
            return Err(Error::Signature(format!("{r} is not an output symbol")));
        }
    }
    let scheme = desugared(&t.scheme);
    let mut avoid = BTreeSet::new();
    let psi = relativize(phi, &scheme, &[], &[], &mut avoid)?;
    let qs: Vec<String> = (0..t.p).map(|_| fresh_name("Q", &mut avoid)).collect();
    let mut el = CopyEliminator::new(t.k, avoid);
    el.params = Some(qs.clone());
    let chi = el.elim(&scheme.chi, &mut Vec::new())?;
    let body = el.elim(&psi, &mut Vec::new())?;
    let mut out = Formula::conj([chi, body]);
    for q in qs.iter().rev() {
        out = Formula::exists(q, out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{library, ApplyOptions};
    use super::*;
    use crate::graph::Graph;
    use crate::logic::holds;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn agree(t: &Transduction, phi: &Formula, g: &Graph) {
        let back = backwards(t, phi).unwrap();
        let lhs = holds(g.structure(), &back).unwrap();
        let outs = t.apply(g.structure(), &ApplyOptions::default()).unwrap();
        let rhs = outs.iter().any(|b| holds(b, phi).unwrap());
        assert_eq!(lhs, rhs, "{phi} on {:?}", g.structure().domain());
    }

    #[test]
    fn identity_is_unchanged_in_meaning() {
        let phi = f("(existsF x (existsF y (rel edg x y)))");
        let back = backwards(&library::identity(), &phi).unwrap();
        assert_eq!(back, phi.desugar(&[]).unwrap());
    }

    #[test]
    fn complement_has_an_edge() {
        let phi = f("(existsF x (existsF y (rel edg x y)))");
        for g in [Graph::complete(3), Graph::path(2), Graph::edgeless(2), Graph::edgeless(1)] {
            agree(&library::complement(), &phi, &g);
        }
    }

    #[test]
    fn restriction_nonempty_domain() {
        let phi = f("(existsF x (true))");
        let back = backwards(&library::delta_restriction(), &phi).unwrap();
        assert_eq!(back.to_string(), "(exists x (and (sing x) (exists y (and (sing y) (rel edg x y)))))");
    }

    #[test]
    fn copies_and_parameters() {
        let sentences = [
            "(existsF x (existsF y (and (rel edg x y) (rel edg y x))))",
            "(exists X (and (card X 1 2) (forallF x (or (not (sub x X)) (existsF y (and (sub y X) (rel edg x y)))))))",
            "(forall X (or (empty X) (existsF x (and (sub x X) (not (rel edg x x))))))",
            "(exists X (exists Y (and (not (empty X)) (rel edg X Y) (not (sub X Y)))))",
        ];
        for s in sentences {
            let phi = f(s);
            for t in library::fixed() {
                for g in [Graph::path(2), Graph::complete(3), Graph::edgeless(2)] {
                    agree(&t, &phi, &g);
                }
            }
        }
    }

    #[test]
    fn rank_kept_for_first_order_sentences() {
        let phi = f("(existsF x (forallF y (or (rel edg x y) (sub x y))))");
        for t in [library::identity(), library::complement()] {
            assert!(backwards(&t, &phi).unwrap().rank() <= phi.rank());
        }
    }

    #[test]
    fn rejects_free_variables() {
        assert!(matches!(backwards(&library::identity(), &f("(sing x)")), Err(Error::Scope(_))));
    }
}
