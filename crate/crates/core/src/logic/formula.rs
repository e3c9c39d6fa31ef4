use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Set-variable MSO with cardinality atoms, plus a first-order sugar layer
/// (`ExistsF`/`ForallF`) that [`Formula::desugar`] removes.
///
/// First-order and set variables share one namespace; in the restricted form
/// an element variable is a set variable guarded by `Sing`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Sub(String, String),
    Rel(String, Vec<String>),
    Sing(String),
    Empty(String),
    /// `|X| ≡ k (mod m)`
    Card(String, usize, usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsF(String, Box<Formula>),
    ForallF(String, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn sub(x: &str, y: &str) -> Formula {
        Sub(x.into(), y.into())
    }

    /// Equality of element variables.
    pub fn eq(x: &str, y: &str) -> Formula {
        Sub(x.into(), y.into())
    }

    pub fn rel(r: &str, args: &[&str]) -> Formula {
        Rel(r.into(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn sing(x: &str) -> Formula {
        Sing(x.into())
    }

    pub fn empty(x: &str) -> Formula {
        Empty(x.into())
    }

    pub fn card(x: &str, k: usize, m: usize) -> Formula {
        Card(x.into(), k, m)
    }

    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Or(fs.into_iter().collect())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Or(vec![Formula::not(a), b])
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and([
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Exists(x.into(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Forall(x.into(), Box::new(f))
    }

    pub fn exists_f(x: &str, f: Formula) -> Formula {
        ExistsF(x.into(), Box::new(f))
    }

    pub fn forall_f(x: &str, f: Formula) -> Formula {
        ForallF(x.into(), Box::new(f))
    }

    /// Conjunction with trivial members folded.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                True => {}
                False => return False,
                And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => True,
            1 => out.pop().expect("one"),
            _ => And(out),
        }
    }

    /// Disjunction with trivial members folded.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                False => {}
                True => return True,
                Or(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => False,
            1 => out.pop().expect("one"),
            _ => Or(out),
        }
    }

    pub fn negate(f: Formula) -> Formula {
        match f {
            True => False,
            False => True,
            Not(g) => *g,
            g => Not(Box::new(g)),
        }
    }

    /// Variables occurring free, in sorted order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut note = |x: &'a str, bound: &Vec<&'a str>| {
            if !bound.contains(&x) {
                out.insert(x.to_string());
            }
        };
        match self {
            True | False => {}
            Sub(x, y) => {
                note(x, bound);
                note(y, bound);
            }
            Rel(_, xs) => xs.iter().for_each(|x| note(x, bound)),
            Sing(x) | Empty(x) | Card(x, _, _) => note(x, bound),
            Not(f) => f.collect_free(bound, out),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Exists(x, f) | Forall(x, f) | ExistsF(x, f) | ForallF(x, f) => {
                bound.push(x);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Sub(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Rel(_, xs) => out.extend(xs.iter().cloned()),
            Sing(x) | Empty(x) | Card(x, _, _) | Exists(x, _) | Forall(x, _) | ExistsF(x, _) | ForallF(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Relation symbols used in `Rel` atoms.
    pub fn relations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Rel(r, _) = f {
                out.insert(r.clone());
            }
        });
        out
    }

    fn visit(&self, g: &mut impl FnMut(&Formula)) {
        g(self);
        match self {
            Not(f) | Exists(_, f) | Forall(_, f) | ExistsF(_, f) | ForallF(_, f) => f.visit(g),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.visit(g)),
            _ => {}
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Not(f) => f.quantifier_depth(),
            And(fs) | Or(fs) => fs.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Exists(_, f) | Forall(_, f) | ExistsF(_, f) | ForallF(_, f) => 1 + f.quantifier_depth(),
            _ => 0,
        }
    }

    pub fn max_modulus(&self) -> usize {
        let mut m = 0;
        self.visit(&mut |f| {
            if let Card(_, _, k) = f {
                m = m.max(*k);
            }
        });
        m
    }

    /// Quantifier depth, raised to the largest cardinality modulus.
    pub fn rank(&self) -> usize {
        self.quantifier_depth().max(self.max_modulus())
    }

    pub fn is_sugared(&self) -> bool {
        let mut s = false;
        self.visit(&mut |f| s |= matches!(f, ExistsF(..) | ForallF(..)));
        s
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Checks well-formedness of `Card` atoms and that all free variables are
    /// among `allowed`.
    pub fn check_scope(&self, allowed: &[&str]) -> Result<()> {
        let mut bad = None;
        self.visit(&mut |f| {
            if let Card(x, k, m) = f {
                if *m == 0 || k >= m {
                    bad = Some(Error::Argument(format!("card {x} {k} {m} needs 0 <= k < m")));
                }
            }
        });
        if let Some(e) = bad {
            return Err(e);
        }
        if let Some(x) = self.free_vars().iter().find(|x| !allowed.contains(&x.as_str())) {
            return Err(Error::Scope(format!("unbound variable {x}")));
        }
        Ok(())
    }

    /// Replaces first-order quantifiers by singleton-guarded set quantifiers.
    /// Free variables must be among `free`.
    pub fn desugar(&self, free: &[&str]) -> Result<Formula> {
        self.check_scope(free)?;
        Ok(self.desugar_unchecked())
    }

    pub(crate) fn desugar_unchecked(&self) -> Formula {
        match self {
            Not(f) => Not(Box::new(f.desugar_unchecked())),
            And(fs) => And(fs.iter().map(Formula::desugar_unchecked).collect()),
            Or(fs) => Or(fs.iter().map(Formula::desugar_unchecked).collect()),
            Exists(x, f) => Exists(x.clone(), Box::new(f.desugar_unchecked())),
            Forall(x, f) => Forall(x.clone(), Box::new(f.desugar_unchecked())),
            ExistsF(x, f) => Exists(x.clone(), Box::new(And(vec![Sing(x.clone()), f.desugar_unchecked()]))),
            ForallF(x, f) => Forall(
                x.clone(),
                Box::new(Or(vec![Not(Box::new(Sing(x.clone()))), f.desugar_unchecked()])),
            ),
            atom => atom.clone(),
        }
    }

    /// Capture-avoiding renaming of free variables.
    pub fn rename(&self, map: &[(String, String)]) -> Formula {
        let mut avoid = self.all_vars();
        avoid.extend(map.iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
        self.rename_in(map, &mut avoid)
    }

    fn rename_in(&self, map: &[(String, String)], avoid: &mut BTreeSet<String>) -> Formula {
        let r = |x: &String| {
            map.iter()
                .find(|(a, _)| a == x)
                .map_or_else(|| x.clone(), |(_, b)| b.clone())
        };
        match self {
            True => True,
            False => False,
            Sub(x, y) => Sub(r(x), r(y)),
            Rel(s, xs) => Rel(s.clone(), xs.iter().map(r).collect()),
            Sing(x) => Sing(r(x)),
            Empty(x) => Empty(r(x)),
            Card(x, k, m) => Card(r(x), *k, *m),
            Not(f) => Not(Box::new(f.rename_in(map, avoid))),
            And(fs) => And(fs.iter().map(|f| f.rename_in(map, avoid)).collect()),
            Or(fs) => Or(fs.iter().map(|f| f.rename_in(map, avoid)).collect()),
            Exists(x, f) | Forall(x, f) | ExistsF(x, f) | ForallF(x, f) => {
                let inner: Vec<(String, String)> = map.iter().filter(|(a, _)| a != x).cloned().collect();
                let (x2, inner) = if inner.iter().any(|(_, b)| b == x) {
                    let fresh = fresh_name(x, avoid);
                    let mut m = inner;
                    m.push((x.clone(), fresh.clone()));
                    (fresh, m)
                } else {
                    (x.clone(), inner)
                };
                let body = Box::new(f.rename_in(&inner, avoid));
                match self {
                    Exists(..) => Exists(x2, body),
                    Forall(..) => Forall(x2, body),
                    ExistsF(..) => ExistsF(x2, body),
                    _ => ForallF(x2, body),
                }
            }
        }
    }

    /// Replaces every `Rel` atom through `f`, which sees the symbol and the
    /// argument names; binders are left alone.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Not(g) => Not(Box::new(g.map_atoms(f))),
            And(gs) => And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Or(gs) => Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Exists(x, g) => Exists(x.clone(), Box::new(g.map_atoms(f))),
            Forall(x, g) => Forall(x.clone(), Box::new(g.map_atoms(f))),
            ExistsF(x, g) => ExistsF(x.clone(), Box::new(g.map_atoms(f))),
            ForallF(x, g) => ForallF(x.clone(), Box::new(g.map_atoms(f))),
            atom => f(atom),
        }
    }
}

/// A name derived from `base` that is not in `avoid`; it is added to `avoid`.
pub fn fresh_name(base: &str, avoid: &mut BTreeSet<String>) -> String {
    let stem = base.trim_start_matches('_');
    let mut i = 0;
    loop {
        let cand = format!("_{stem}{i}");
        if avoid.insert(cand.clone()) {
            return cand;
        }
        i += 1;
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => write!(f, "(true)"),
            False => write!(f, "(false)"),
            Sub(x, y) => write!(f, "(sub {x} {y})"),
            Rel(r, xs) => {
                write!(f, "(rel {r}")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Sing(x) => write!(f, "(sing {x})"),
            Empty(x) => write!(f, "(empty {x})"),
            Card(x, k, m) => write!(f, "(card {x} {k} {m})"),
            Not(g) => write!(f, "(not {g})"),
            And(gs) | Or(gs) => {
                write!(f, "({}", if matches!(self, And(_)) { "and" } else { "or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Exists(x, g) => write!(f, "(exists {x} {g})"),
            Forall(x, g) => write!(f, "(forall {x} {g})"),
            ExistsF(x, g) => write!(f, "(existsF {x} {g})"),
            ForallF(x, g) => write!(f, "(forallF {x} {g})"),
        }
    }
}

#[derive(Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let t = tokens
        .get(*pos)
        .ok_or_else(|| Error::Format("unexpected end of formula".into()))?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                    None => return Err(Error::Format("unbalanced parentheses".into())),
                }
            }
        }
        ")" => Err(Error::Format("unexpected )".into())),
        a => Ok(Sexp::Atom(a.to_string())),
    }
}

fn name(s: &Sexp) -> Result<String> {
    match s {
        Sexp::Atom(a) => Ok(a.clone()),
        Sexp::List(_) => Err(Error::Format("expected a name".into())),
    }
}

fn number(s: &Sexp) -> Result<usize> {
    name(s)?
        .parse()
        .map_err(|_| Error::Format("expected a number".into()))
}

fn convert(s: &Sexp) -> Result<Formula> {
    let Sexp::List(items) = s else {
        return Err(Error::Format(format!("expected a formula, found {}", name(s)?)));
    };
    let head = items
        .first()
        .map(name)
        .transpose()?
        .ok_or_else(|| Error::Format("empty list".into()))?;
    let args = &items[1..];
    let want = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Format(format!("{head} expects {n} arguments, got {}", args.len())))
        }
    };
    Ok(match head.as_str() {
        "true" => {
            want(0)?;
            True
        }
        "false" => {
            want(0)?;
            False
        }
        "sub" => {
            want(2)?;
            Sub(name(&args[0])?, name(&args[1])?)
        }
        "sing" => {
            want(1)?;
            Sing(name(&args[0])?)
        }
        "empty" => {
            want(1)?;
            Empty(name(&args[0])?)
        }
        "card" => {
            want(3)?;
            let (k, m) = (number(&args[1])?, number(&args[2])?);
            if m == 0 || k >= m {
                return Err(Error::Format(format!("card needs 0 <= k < m, got {k} {m}")));
            }
            Card(name(&args[0])?, k, m)
        }
        "rel" => {
            if args.is_empty() {
                return Err(Error::Format("rel needs a symbol".into()));
            }
            Rel(name(&args[0])?, args[1..].iter().map(name).collect::<Result<_>>()?)
        }
        "not" => {
            want(1)?;
            Not(Box::new(convert(&args[0])?))
        }
        "and" => And(args.iter().map(convert).collect::<Result<_>>()?),
        "or" => Or(args.iter().map(convert).collect::<Result<_>>()?),
        "exists" | "forall" | "existsF" | "forallF" => {
            want(2)?;
            let (x, body) = (name(&args[0])?, Box::new(convert(&args[1])?));
            match head.as_str() {
                "exists" => Exists(x, body),
                "forall" => Forall(x, body),
                "existsF" => ExistsF(x, body),
                _ => ForallF(x, body),
            }
        }
        other => return Err(Error::Format(format!("unknown connective {other}"))),
    })
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Formula> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let sexp = read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Format("trailing input after formula".into()));
        }
        convert(&sexp)
    }
}
