//! Brute-force model checking over bitmask-encoded subsets.

use std::cell::Cell;

use super::formula::Formula;
use crate::error::{check_budget, Error, Result};
use crate::structure::Structure;

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// Largest domain over which unrestricted set quantifiers are enumerated.
    pub max_set_domain: usize,
    /// Upper bound on quantifier iterations for one evaluation.
    pub max_steps: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_set_domain: 16,
            max_steps: 4_000_000_000,
        }
    }
}

#[derive(Debug)]
enum C {
    True,
    False,
    Sub(usize, usize),
    Rel(usize, Vec<usize>),
    Sing(usize),
    Empty(usize),
    Card(usize, usize, usize),
    Not(Box<C>),
    And(Vec<C>),
    Or(Vec<C>),
    Quant {
        exists: bool,
        slot: usize,
        singles: bool,
        /// Guards that confine an element quantifier to fewer candidates.
        guards: Vec<Guard>,
        body: Box<C>,
    },
}

/// An atom `g(x)` that must hold for the bound element x to matter: a
/// conjunct of an existential body, or a negated disjunct of a universal one.
#[derive(Debug)]
enum Guard {
    Unary(usize),
    /// R(x, y)
    First(usize, usize),
    /// R(y, x)
    Second(usize, usize),
    /// x ⊆ y
    Within(usize),
}

fn guards_of(exists: bool, slot: usize, body: &C) -> Vec<Guard> {
    let atoms: Vec<&C> = match (exists, body) {
        (true, C::And(cs)) => cs.iter().collect(),
        (false, C::Or(cs)) => cs.iter().filter_map(|c| if let C::Not(a) = c { Some(&**a) } else { None }).collect(),
        _ => return Vec::new(),
    };
    atoms
        .into_iter()
        .filter_map(|a| match a {
            C::Rel(r, args) => match args.as_slice() {
                [x] if *x == slot => Some(Guard::Unary(*r)),
                [x, y] if *x == slot && *y != slot => Some(Guard::First(*r, *y)),
                [y, x] if *x == slot && *y != slot => Some(Guard::Second(*r, *y)),
                _ => None,
            },
            C::Sub(x, y) if *x == slot && *y != slot => Some(Guard::Within(*y)),
            _ => None,
        })
        .collect()
}

/// A formula resolved against a structure; free variables occupy the first
/// slots in the order given to [`Compiled::new`].
pub struct Compiled<'a> {
    s: &'a Structure,
    rels: Vec<Vec<Vec<usize>>>,
    dense: Vec<Dense>,
    code: C,
    slots: usize,
    free: usize,
    opts: EvalOptions,
    steps: Cell<u64>,
}

impl<'a> Compiled<'a> {
    pub fn new(s: &'a Structure, f: &Formula, free: &[&str], opts: EvalOptions) -> Result<Compiled<'a>> {
        check_budget("domain size for bitmask evaluation", 63, s.len())?;
        let mut scope: Vec<(String, usize)> = free.iter().enumerate().map(|(i, x)| (x.to_string(), i)).collect();
        let consts: Vec<(String, usize)> = s.constants().iter().map(|(c, &e)| (c.clone(), e)).collect();
        for (i, (c, _)) in consts.iter().enumerate() {
            if !free.contains(&c.as_str()) {
                scope.insert(0, (c.clone(), free.len() + i));
            }
        }
        let mut next = free.len() + consts.len();
        let mut unrestricted = false;
        let code = compile(s, f, &mut scope, &mut next, &mut unrestricted)?;
        if unrestricted {
            check_budget("domain size for set quantification", opts.max_set_domain, s.len())?;
        }
        Ok(Compiled {
            s,
            rels: s.relations().iter().map(|r| r.iter().cloned().collect()).collect(),
            dense: s.relations().iter().map(|r| Dense::new(r, s.len())).collect(),
            code,
            slots: next,
            free: free.len(),
            opts,
            steps: Cell::new(0),
        })
    }

    /// Replaces the unary relation at index `r` by the set `mask`, so one
    /// compilation serves every parameter choice.
    pub fn set_unary(&mut self, r: usize, mask: u64) {
        self.rels[r] = (0..self.s.len()).filter(|&e| mask >> e & 1 == 1).map(|e| vec![e]).collect();
        self.dense[r] = Dense::Unary(mask);
    }

    /// Evaluates with the free variables bound to the given subsets.
    pub fn eval(&self, values: &[u64]) -> Result<bool> {
        assert_eq!(values.len(), self.free, "one value per free variable");
        let mut env = vec![0u64; self.slots];
        env[..self.free].copy_from_slice(values);
        for (i, (_, &e)) in self.s.constants().iter().enumerate() {
            env[self.free + i] = 1 << e;
        }
        self.steps.set(0);
        self.run(&self.code, &mut env)
    }

    /// Elements that satisfy every guard; the others decide nothing.
    fn candidates(&self, guards: &[Guard], env: &[u64]) -> u64 {
        let n = self.s.len();
        let mut m = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for g in guards {
            m &= match (g, g.relation().map(|r| &self.dense[r])) {
                (Guard::Unary(_), Some(Dense::Unary(u))) => *u,
                (Guard::First(_, y), Some(Dense::Binary(rows))) => {
                    (0..n).filter(|&a| rows[a] & env[*y] != 0).fold(0, |acc, a| acc | 1 << a)
                }
                (Guard::Second(_, y), Some(Dense::Binary(rows))) => {
                    let mut ys = env[*y];
                    let mut acc = 0;
                    while ys != 0 {
                        acc |= rows[ys.trailing_zeros() as usize];
                        ys &= ys - 1;
                    }
                    acc
                }
                (Guard::Within(y), _) => env[*y],
                _ => continue,
            };
        }
        m
    }

    fn run(&self, c: &C, env: &mut Vec<u64>) -> Result<bool> {
        Ok(match c {
            C::True => true,
            C::False => false,
            C::Sub(x, y) => env[*x] & !env[*y] == 0,
            C::Sing(x) => env[*x].count_ones() == 1,
            C::Empty(x) => env[*x] == 0,
            C::Card(x, k, m) => env[*x].count_ones() as usize % m == *k,
            C::Rel(r, args) => match (&self.dense[*r], args.as_slice()) {
                (Dense::Unary(m), [x]) => m & env[*x] != 0,
                (Dense::Binary(rows), [x, y]) => {
                    let (mut xs, ys) = (env[*x], env[*y]);
                    let mut hit = false;
                    while xs != 0 && !hit {
                        hit = rows[xs.trailing_zeros() as usize] & ys != 0;
                        xs &= xs - 1;
                    }
                    hit
                }
                _ => self.rels[*r]
                    .iter()
                    .any(|t| t.iter().zip(args).all(|(&a, &x)| env[x] >> a & 1 == 1)),
            },
            C::Not(g) => !self.run(g, env)?,
            C::And(gs) => {
                for g in gs {
                    if !self.run(g, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            C::Or(gs) => {
                for g in gs {
                    if self.run(g, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            C::Quant {
                exists,
                slot,
                singles,
                guards,
                body,
            } => {
                let n = self.s.len();
                let candidates = if *singles { self.candidates(guards, env) } else { 0 };
                let count: u64 = if *singles { candidates.count_ones() as u64 } else { 1u64 << n };
                let steps = self.steps.get() + count;
                if steps > self.opts.max_steps {
                    return Err(Error::budget("evaluation steps", self.opts.max_steps as usize, steps as usize));
                }
                self.steps.set(steps);
                let saved = env[*slot];
                let mut result = !*exists;
                let mut rest = candidates;
                for i in 0..count {
                    env[*slot] = if *singles {
                        let bit = rest & rest.wrapping_neg();
                        rest &= rest - 1;
                        bit
                    } else {
                        i
                    };
                    if self.run(body, env)? == *exists {
                        result = *exists;
                        break;
                    }
                }
                env[*slot] = saved;
                result
            }
        })
    }
}

impl Guard {
    fn relation(&self) -> Option<usize> {
        match self {
            Guard::Unary(r) | Guard::First(r, _) | Guard::Second(r, _) => Some(*r),
            Guard::Within(_) => None,
        }
    }
}

/// Bit tables for unary and binary relations.
enum Dense {
    Unary(u64),
    /// Row a holds the b with (a, b) in the relation.
    Binary(Vec<u64>),
    Other,
}

impl Dense {
    fn new(r: &std::collections::BTreeSet<Vec<usize>>, n: usize) -> Dense {
        match r.first().map(Vec::len) {
            Some(1) => Dense::Unary(r.iter().fold(0, |m, t| m | 1 << t[0])),
            Some(2) => {
                let mut rows = vec![0u64; n];
                for t in r {
                    rows[t[0]] |= 1 << t[1];
                }
                Dense::Binary(rows)
            }
            _ => Dense::Other,
        }
    }
}

fn lookup(scope: &[(String, usize)], x: &str) -> Result<usize> {
    scope
        .iter()
        .rev()
        .find(|(n, _)| n == x)
        .map(|&(_, s)| s)
        .ok_or_else(|| Error::Scope(format!("unbound variable {x}")))
}

fn compile(
    s: &Structure,
    f: &Formula,
    scope: &mut Vec<(String, usize)>,
    next: &mut usize,
    unrestricted: &mut bool,
) -> Result<C> {
    use Formula as F;
    Ok(match f {
        F::True => C::True,
        F::False => C::False,
        F::Sub(x, y) => C::Sub(lookup(scope, x)?, lookup(scope, y)?),
        F::Sing(x) => C::Sing(lookup(scope, x)?),
        F::Empty(x) => C::Empty(lookup(scope, x)?),
        F::Card(x, k, m) => {
            if *m == 0 || k >= m {
                return Err(Error::Argument(format!("card {x} {k} {m} needs 0 <= k < m")));
            }
            C::Card(lookup(scope, x)?, *k, *m)
        }
        F::Rel(r, xs) => {
            let idx = s
                .signature()
                .index_of(r)
                .ok_or_else(|| Error::Signature(format!("unknown relation {r}")))?;
            let arity = s.signature().symbols()[idx].arity;
            if arity != xs.len() {
                return Err(Error::Signature(format!("{r} has arity {arity}, used with {}", xs.len())));
            }
            C::Rel(idx, xs.iter().map(|x| lookup(scope, x)).collect::<Result<_>>()?)
        }
        F::Not(g) => C::Not(Box::new(compile(s, g, scope, next, unrestricted)?)),
        F::And(gs) => C::And(gs.iter().map(|g| compile(s, g, scope, next, unrestricted)).collect::<Result<_>>()?),
        F::Or(gs) => C::Or(gs.iter().map(|g| compile(s, g, scope, next, unrestricted)).collect::<Result<_>>()?),
        F::Exists(x, g) | F::Forall(x, g) | F::ExistsF(x, g) | F::ForallF(x, g) => {
            let exists = matches!(f, F::Exists(..) | F::ExistsF(..));
            let singles = match f {
                F::ExistsF(..) | F::ForallF(..) => true,
                F::Exists(..) => matches!(&**g, F::And(cs) if cs.iter().any(|c| matches!(c, F::Sing(y) if y == x))),
                _ => matches!(&**g, F::Or(cs) if cs.iter().any(|c| matches!(c, F::Not(b) if matches!(&**b, F::Sing(y) if y == x)))),
            };
            if !g.free_vars().contains(x) {
                // a vacuous quantifier ranges over a nonempty set of values,
                // except element quantifiers on the empty domain
                if singles && s.is_empty() {
                    return Ok(if exists { C::False } else { C::True });
                }
                return compile(s, g, scope, next, unrestricted);
            }
            *unrestricted |= !singles;
            let slot = *next;
            *next += 1;
            scope.push((x.clone(), slot));
            let body = compile(s, g, scope, next, unrestricted);
            scope.pop();
            let body = body?;
            C::Quant {
                exists,
                slot,
                singles,
                guards: if singles { guards_of(exists, slot, &body) } else { Vec::new() },
                body: Box::new(body),
            }
        }
    })
}

/// Evaluates `f` with its free variables bound to subsets given as bitmasks.
pub fn eval(s: &Structure, f: &Formula, assignment: &[(&str, u64)]) -> Result<bool> {
    eval_with(s, f, assignment, EvalOptions::default())
}

pub fn eval_with(s: &Structure, f: &Formula, assignment: &[(&str, u64)], opts: EvalOptions) -> Result<bool> {
    let names: Vec<&str> = assignment.iter().map(|(n, _)| *n).collect();
    let values: Vec<u64> = assignment.iter().map(|&(_, v)| v).collect();
    Compiled::new(s, f, &names, opts)?.eval(&values)
}

/// Truth of a sentence.
pub fn holds(s: &Structure, f: &Formula) -> Result<bool> {
    eval(s, f, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn basic_sentences() {
        let k3 = Graph::complete(3);
        assert!(holds(k3.structure(), &f("(exists X (rel edg X X))")).unwrap());
        let e = Graph::edgeless(3);
        assert!(!holds(e.structure(), &f("(existsF x (existsF y (rel edg x y)))")).unwrap());
    }

    #[test]
    fn vacuous_quantifiers() {
        // 2^30 subsets would exceed every budget if enumerated
        let big = Graph::path(29);
        assert!(!holds(big.structure(), &f("(exists X (false))")).unwrap());
        assert!(holds(big.structure(), &f("(forall X (existsF y (true)))")).unwrap());
        let empty = Graph::edgeless(0);
        assert!(!holds(empty.structure(), &f("(existsF x (true))")).unwrap());
        assert!(holds(empty.structure(), &f("(forallF x (false))")).unwrap());
        assert!(holds(empty.structure(), &f("(exists X (true))")).unwrap());
    }

    #[test]
    fn two_colourability() {
        let bip = f("(exists X (forallF x (forallF y (or (not (rel edg x y)) (and (sub x X) (not (sub y X))) (and (not (sub x X)) (sub y X))))))");
        let d = bip.desugar(&[]).unwrap();
        assert!(holds(Graph::path(3).structure(), &d).unwrap());
        assert!(!holds(Graph::complete(3).structure(), &d).unwrap());
        assert!(holds(Graph::path(3).structure(), &bip).unwrap());
    }

    #[test]
    fn free_variables_and_scope() {
        let p = Graph::path(2);
        let g = f("(rel edg x y)");
        assert!(eval(p.structure(), &g, &[("x", 1), ("y", 2)]).unwrap());
        assert!(!eval(p.structure(), &g, &[("x", 1), ("y", 4)]).unwrap());
        assert!(matches!(holds(p.structure(), &g), Err(Error::Scope(_))));
        assert!(matches!(holds(p.structure(), &f("(exists X (rel foo X))")), Err(Error::Signature(_))));
    }

    #[test]
    fn cardinality() {
        let p = Graph::path(3);
        assert!(holds(p.structure(), &f("(exists X (and (card X 1 3) (not (sing X))))")).unwrap());
        assert!(eval(p.structure(), &f("(card X 0 2)"), &[("X", 0b1010)]).unwrap());
    }

    #[test]
    fn budgets() {
        let big = Graph::edgeless(20);
        let r = holds(big.structure(), &f("(exists X (empty X))"));
        assert!(matches!(r, Err(Error::Budget { .. })));
        // singleton-guarded quantifiers are not limited by the set budget
        assert!(holds(big.structure(), &f("(exists x (and (sing x) (not (rel edg x x))))")).unwrap());
    }
}
