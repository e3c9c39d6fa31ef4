//! Symbolic composition of transductions.
//!
//! For `σ ∘ τ` with copy counts `kσ, kτ`, the composite copies `kσ·kτ` times;
//! copy `iσ·kτ + iτ` stands for copy `iσ` (of σ) of the τ-output element in
//! copy `iτ`. Its parameters are τ's followed by σ's, the latter split into
//! one set per τ-copy.

use std::collections::BTreeSet;

use super::backwards::{desugared, relativize, scheme_vars, CopyEliminator, Loc};
use super::{copy_symbol, param_symbol, DefinitionScheme, Transduction, SIM};
use crate::error::{Error, Result};
use crate::logic::{fresh_name, Formula};

struct Composer<'a> {
    sigma: &'a Transduction,
    tau: DefinitionScheme,
    kt: usize,
    ks: usize,
    pt: usize,
    avoid: BTreeSet<String>,
}

fn sigma_param(j: usize) -> String {
    format!("_sp{j}")
}

impl Composer<'_> {
    fn kk(&self) -> usize {
        self.kt * self.ks
    }

    /// A τ-level formula (over copy_kτ of the expanded input) as a formula
    /// over the expanded input, free variables placed in τ-copies.
    fn down_tau(&mut self, f: &Formula, free: &[(String, usize)]) -> Result<Formula> {
        let mut el = CopyEliminator::new(self.kt, std::mem::take(&mut self.avoid));
        el.varying = (0..self.sigma.p)
            .map(|j| {
                let names = (0..self.kt).map(|c| param_symbol(self.pt + j * self.kt + c)).collect();
                (sigma_param(j), names)
            })
            .collect();
        let mut env: Vec<(String, Loc)> = free.iter().map(|(x, i)| (x.clone(), Loc::At(*i))).collect();
        let out = el.elim(f, &mut env);
        self.avoid = el.avoid;
        let out = out?;
        let back: Vec<(String, String)> = free.iter().map(|(x, i)| (el_component(self.kt, x, *i), x.clone())).collect();
        Ok(out.rename(&back))
    }

    /// A σ-level formula with free variables at (σ-copy, τ-copy) positions.
    fn through(&mut self, f: &Formula, free: &[(String, usize, usize)]) -> Result<Formula> {
        let p = self.sigma.p;
        let f = f.desugar_unchecked().map_atoms(&mut |a| match a {
            Formula::Rel(r, zs) => match (0..p).find(|&j| &param_symbol(j) == r) {
                Some(j) => Formula::Rel(sigma_param(j), zs.clone()),
                None => a.clone(),
            },
            _ => a.clone(),
        });
        // remove σ's copies
        let mut el = CopyEliminator::new(self.ks, std::mem::take(&mut self.avoid));
        let mut env: Vec<(String, Loc)> = free.iter().map(|(x, i, _)| (x.clone(), Loc::At(*i))).collect();
        let g = el.elim(&f, &mut env);
        self.avoid = el.avoid;
        let g = g?;
        let names: Vec<(String, usize)> = free
            .iter()
            .map(|(x, i, it)| (el_component(self.ks, x, *i), *it))
            .collect();
        // pull back through τ's scheme
        let singles: Vec<String> = names.iter().map(|(n, _)| n.clone()).collect();
        let pass: Vec<String> = (0..p).map(sigma_param).collect();
        let tau = self.tau.clone();
        let h = relativize(&g, &tau, &pass, &singles, &mut self.avoid)?;
        let h = self.down_tau(&h, &names)?;
        let back: Vec<(String, String)> = free
            .iter()
            .zip(&names)
            .map(|((x, _, _), (n, _))| (n.clone(), x.clone()))
            .collect();
        Ok(h.rename(&back))
    }

    /// Moves a formula over the expanded input into copy 0 of the composite
    /// copy structure; free variables are reached through their copy-0 twins.
    fn lift(&mut self, f: Formula, free: &[String]) -> Formula {
        if self.kk() == 1 {
            return f;
        }
        let mut body = self.relativize_copy0(&f);
        let mut map = Vec::new();
        let mut twins = Vec::new();
        for x in free {
            let t = fresh_name(x, &mut self.avoid);
            map.push((x.clone(), t.clone()));
            twins.push((x.clone(), t));
        }
        body = body.rename(&map);
        for (x, t) in twins.into_iter().rev() {
            body = Formula::exists(
                &t,
                Formula::conj([
                    Formula::sing(&t),
                    Formula::rel(&copy_symbol(0), &[&t]),
                    Formula::rel(SIM, &[&t, &x]),
                    body,
                ]),
            );
        }
        body
    }

    fn relativize_copy0(&mut self, f: &Formula) -> Formula {
        use Formula::*;
        let c0 = copy_symbol(0);
        match f {
            Not(g) => Formula::not(self.relativize_copy0(g)),
            And(gs) => And(gs.iter().map(|g| self.relativize_copy0(g)).collect()),
            Or(gs) => Or(gs.iter().map(|g| self.relativize_copy0(g)).collect()),
            Exists(x, b) => {
                let inner = self.relativize_copy0(b);
                if matches!(&**b, And(cs) if cs.iter().any(|c| matches!(c, Sing(y) if y == x))) {
                    Formula::exists(x, Formula::conj([inner, Formula::rel(&c0, &[x])]))
                } else {
                    let g = self.inside_copy0(x);
                    Formula::exists(x, Formula::conj([g, inner]))
                }
            }
            Forall(x, b) => {
                let inner = self.relativize_copy0(b);
                if matches!(&**b, Or(cs) if cs.iter().any(|c| matches!(c, Not(s) if matches!(&**s, Sing(y) if y == x)))) {
                    Formula::forall(x, Formula::disj([inner, Formula::not(Formula::rel(&c0, &[x]))]))
                } else {
                    let g = self.inside_copy0(x);
                    Formula::forall(x, Formula::disj([Formula::not(g), inner]))
                }
            }
            ExistsF(..) | ForallF(..) => self.relativize_copy0(&f.desugar_unchecked()),
            atom => atom.clone(),
        }
    }

    fn inside_copy0(&mut self, x: &str) -> Formula {
        let y = fresh_name("y", &mut self.avoid);
        Formula::forall(
            &y,
            Formula::or([
                Formula::not(Formula::sing(&y)),
                Formula::not(Formula::sub(&y, x)),
                Formula::rel(&copy_symbol(0), &[&y]),
            ]),
        )
    }

    fn copy_tag(&self, x: &str, c: usize) -> Formula {
        if self.kk() == 1 {
            Formula::True
        } else {
            Formula::rel(&copy_symbol(c), &[x])
        }
    }
}

fn el_component(k: usize, x: &str, i: usize) -> String {
    if k == 1 {
        x.to_string()
    } else {
        format!("{x}^{i}")
    }
}

/// The transduction `σ ∘ τ`: first τ, then σ.
pub fn compose(sigma: &Transduction, tau: &Transduction) -> Result<Transduction> {
    if sigma.input != tau.scheme.output {
        return Err(Error::Signature("input of the outer transduction must equal the output of the inner one".into()));
    }
    let ss = desugared(&sigma.scheme);
    let ts = desugared(&tau.scheme);
    let mut avoid = scheme_vars(&ss);
    avoid.extend(scheme_vars(&ts));
    let mut c = Composer {
        sigma,
        tau: ts.clone(),
        kt: tau.k,
        ks: sigma.k,
        pt: tau.p,
        avoid,
    };
    let kk = c.kk();

    let chi_t = c.down_tau(&ts.chi, &[])?;
    let chi_s = c.through(&ss.chi, &[])?;
    let chi = Formula::conj([c.lift(chi_t, &[]), c.lift(chi_s, &[])]);

    let v = ss.delta.0.clone();
    let delta_t = ts.delta.1.rename(&[(ts.delta.0.clone(), v.clone())]);
    let mut alts = Vec::new();
    for cc in 0..kk {
        let (is, it) = (cc / c.kt, cc % c.kt);
        let a = c.down_tau(&delta_t, &[(v.clone(), it)])?;
        let b = c.through(&ss.delta.1, &[(v.clone(), is, it)])?;
        let lifted = c.lift(Formula::conj([a, b]), &[v.clone()]);
        alts.push(Formula::conj([c.copy_tag(&v, cc), lifted]));
    }
    let delta = Formula::disj(alts);

    let mut phis = Vec::new();
    for (vars, phi) in &ss.phis {
        let r = vars.len();
        let mut alts = Vec::new();
        for code in 0..kk.pow(r as u32) {
            let mut x = code;
            let cs: Vec<usize> = (0..r)
                .map(|_| {
                    let v = x % kk;
                    x /= kk;
                    v
                })
                .collect();
            let free: Vec<(String, usize, usize)> = vars
                .iter()
                .zip(&cs)
                .map(|(v, &cc)| (v.clone(), cc / c.kt, cc % c.kt))
                .collect();
            let body = c.through(phi, &free)?;
            let lifted = c.lift(body, vars);
            let mut parts: Vec<Formula> = vars.iter().zip(&cs).map(|(v, &cc)| c.copy_tag(v, cc)).collect();
            parts.push(lifted);
            alts.push(Formula::conj(parts));
        }
        phis.push((vars.clone(), Formula::disj(alts)));
    }

    Transduction::new(
        tau.input.clone(),
        kk,
        tau.p + tau.k * sigma.p,
        DefinitionScheme {
            output: ss.output.clone(),
            chi,
            delta: (v, delta),
            phis,
        },
    )
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::{library, ApplyOptions};
    use super::*;
    use crate::graph::Graph;
    use crate::iso::{canonical_form, CanonicalForm};
    use crate::structure::Structure;

    fn outputs(t: &Transduction, a: &Structure) -> BTreeSet<CanonicalForm> {
        t.apply(a, &ApplyOptions::default())
            .unwrap()
            .iter()
            .map(canonical_form)
            .collect()
    }

    fn two_stage(s: &Transduction, t: &Transduction, a: &Structure) -> BTreeSet<CanonicalForm> {
        let mut out = BTreeSet::new();
        for b in t.apply(a, &ApplyOptions::default()).unwrap() {
            out.extend(outputs(s, &b));
        }
        out
    }

    #[test]
    fn composites_match_two_stage_application() {
        let graphs = [Graph::path(2), Graph::complete(3), Graph::edgeless(2), Graph::path(1)];
        for (sn, s) in library::named() {
            for (tn, t) in library::named() {
                let r = compose(&s, &t).unwrap();
                for g in &graphs {
                    assert_eq!(outputs(&r, g.structure()), two_stage(&s, &t, g.structure()), "{sn} after {tn}");
                }
            }
        }
    }

    #[test]
    fn double_complement_is_identity() {
        let c = library::complement();
        let r = compose(&c, &c).unwrap();
        let g = Graph::path(3);
        assert_eq!(outputs(&r, g.structure()), outputs(&library::identity(), g.structure()));
    }

    #[test]
    fn signature_mismatch() {
        let other = Transduction::identity(&crate::structure::Signature::new([("R", 3)]).unwrap());
        assert!(matches!(compose(&other, &library::identity()), Err(Error::Signature(_))));
    }
}
