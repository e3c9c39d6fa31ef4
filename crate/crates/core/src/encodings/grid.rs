//! Structures inside grids: orienting an undirected grid with six mod-3
//! parameter sets, and placing an incidence structure on the border and
//! interior of a directed grid.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_signature, Graph, EDGE};
use crate::incidence::{incidence_signature, label_symbol, position_symbol, split, to_incidence, IncidenceStructure};
use crate::logic::Formula;
use crate::structure::{Signature, Structure, Symbol};
use crate::transduction::{param_symbol, DefinitionScheme, Transduction};

pub const E0: &str = "E0";
pub const E1: &str = "E1";

/// `P_m` (rows ≡ m mod 3) and `Q_m` (columns ≡ m mod 3) as vertex sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridParams {
    pub p: [BTreeSet<usize>; 3],
    pub q: [BTreeSet<usize>; 3],
}

impl GridParams {
    /// The classes read off the vertex names of [`Graph::grid`], with the
    /// row classes shifted by `row_shift`.
    pub fn standard(g: &Graph, row_shift: usize) -> Result<GridParams> {
        let mut p: [BTreeSet<usize>; 3] = Default::default();
        let mut q: [BTreeSet<usize>; 3] = Default::default();
        for v in 0..g.vertex_count() {
            let (i, k) = Graph::grid_coords(g.name(v))
                .ok_or_else(|| Error::Argument(format!("{} is not a grid vertex name", g.name(v))))?;
            p[(i + row_shift) % 3].insert(v);
            q[k % 3].insert(v);
        }
        Ok(GridParams { p, q })
    }

    /// Parameter bitmasks in the order `P_0, P_1, P_2, Q_0, Q_1, Q_2`.
    pub fn masks(&self) -> Vec<u64> {
        self.p
            .iter()
            .chain(&self.q)
            .map(|s| s.iter().fold(0u64, |m, &v| m | 1 << v))
            .collect()
    }
}

/// The directed grid `⟨V, E_0, E_1⟩` as index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub e0: BTreeSet<(usize, usize)>,
    pub e1: BTreeSet<(usize, usize)>,
}

impl Orientation {
    pub fn to_structure(&self, g: &Graph) -> Structure {
        let sig = Signature::new([(E0, 2), (E1, 2)]).expect("static");
        let rels = vec![
            self.e0.iter().map(|&(u, v)| vec![u, v]).collect(),
            self.e1.iter().map(|&(u, v)| vec![u, v]).collect(),
        ];
        Structure::from_named(sig, g.structure().domain().to_vec(), rels).expect("grid names")
    }
}

fn class_of(sets: &[BTreeSet<usize>; 3], v: usize) -> Result<usize> {
    let hits: Vec<usize> = (0..3).filter(|&m| sets[m].contains(&v)).collect();
    match hits[..] {
        [m] => Ok(m),
        _ => Err(Error::Structural(format!("vertex #{v} lies in {} classes of a triple", hits.len()))),
    }
}

/// `E_0 = {(u,v) ∈ edg : u ∈ P_i, v ∈ P_j, i ≡ j−1}`, likewise `E_1` with `Q`.
/// The result is checked to be a directed grid: a unique origin from which
/// every vertex gets distinct coordinates filling a rectangle, with `E_0`
/// and `E_1` exactly the row and column increments.
pub fn grid_orient(g: &Graph, params: &GridParams) -> Result<Orientation> {
    let n = g.vertex_count();
    let mut e0 = BTreeSet::new();
    let mut e1 = BTreeSet::new();
    for v in 0..n {
        let (pv, qv) = (class_of(&params.p, v)?, class_of(&params.q, v)?);
        for &w in g.neighbors(v) {
            let (pw, qw) = (class_of(&params.p, w)?, class_of(&params.q, w)?);
            if (pv + 1) % 3 == pw {
                e0.insert((v, w));
            }
            if (qv + 1) % 3 == qw {
                e1.insert((v, w));
            }
        }
    }
    let o = Orientation { e0, e1 };
    check_directed_grid(g, &o)?;
    Ok(o)
}

fn check_directed_grid(g: &Graph, o: &Orientation) -> Result<()> {
    let n = g.vertex_count();
    let bad = |msg: String| Err(Error::Structural(format!("inconsistent orientation parameters: {msg}")));
    for (u, v) in g.edges() {
        let count = [(u, v), (v, u)]
            .iter()
            .map(|e| o.e0.contains(e) as usize + o.e1.contains(e) as usize)
            .sum::<usize>();
        if count != 1 {
            return bad(format!("edge {}–{} oriented {count} times", g.name(u), g.name(v)));
        }
    }
    if n == 0 {
        return Ok(());
    }
    let succ = |rel: &BTreeSet<(usize, usize)>, u: usize| -> Vec<usize> {
        rel.range((u, 0)..(u + 1, 0)).map(|&(_, v)| v).collect()
    };
    let has_in = |v: usize| o.e0.iter().chain(&o.e1).any(|&(_, w)| w == v);
    let origins: Vec<usize> = (0..n).filter(|&v| !has_in(v)).collect();
    let [origin] = origins[..] else {
        return bad(format!("{} vertices without incoming edges", origins.len()));
    };
    let mut coord: Vec<Option<(usize, usize)>> = vec![None; n];
    coord[origin] = Some((0, 0));
    let mut stack = vec![origin];
    while let Some(u) = stack.pop() {
        let (i, k) = coord[u].expect("visited");
        for (rel, c) in [(&o.e0, (i + 1, k)), (&o.e1, (i, k + 1))] {
            for w in succ(rel, u) {
                match coord[w] {
                    None => {
                        coord[w] = Some(c);
                        stack.push(w);
                    }
                    Some(d) if d == c => {}
                    Some(_) => return bad(format!("{} reached at two coordinates", g.name(w))),
                }
            }
        }
    }
    let coords: Vec<(usize, usize)> = match coord.iter().copied().collect::<Option<Vec<_>>>() {
        Some(c) => c,
        None => return bad("some vertex is unreachable from the origin".into()),
    };
    let rows = coords.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let cols = coords.iter().map(|c| c.1).max().unwrap_or(0) + 1;
    let at: BTreeMap<(usize, usize), usize> = coords.iter().enumerate().map(|(v, &c)| (c, v)).collect();
    if at.len() != n || rows * cols != n {
        return bad(format!("coordinates do not fill a {rows}×{cols} rectangle"));
    }
    let mut want0 = BTreeSet::new();
    let mut want1 = BTreeSet::new();
    for (&(i, k), &v) in &at {
        if let Some(&w) = at.get(&(i + 1, k)) {
            want0.insert((v, w));
        }
        if let Some(&w) = at.get(&(i, k + 1)) {
            want1.insert((v, w));
        }
    }
    if want0 != o.e0 || want1 != o.e1 {
        return bad("edges are not the row and column increments".into());
    }
    Ok(())
}

fn f(s: &str) -> Formula {
    s.parse().expect("static formula")
}

/// The 6-parameter transduction `⟨V, edg⟩ ↦ ⟨V, E_0, E_1⟩`. χ checks the
/// local part of the parameter conditions: both triples partition the
/// vertices and every edge is oriented exactly once.
pub fn grid_orient_transduction() -> Transduction {
    let p = |m: usize, x: &str| format!("(rel {} {x})", param_symbol(m));
    let q = |m: usize, x: &str| format!("(rel {} {x})", param_symbol(3 + m));
    let step = |cls: &dyn Fn(usize, &str) -> String, x: &str, y: &str| {
        let cases: Vec<String> = (0..3).map(|i| format!("(and {} {})", cls(i, x), cls((i + 1) % 3, y))).collect();
        format!("(or {})", cases.join(" "))
    };
    let partition = |cls: &dyn Fn(usize, &str) -> String| {
        format!(
            "(forallF x (or (and {a} (not {b}) (not {c})) (and (not {a}) {b} (not {c})) (and (not {a}) (not {b}) {c})))",
            a = cls(0, "x"),
            b = cls(1, "x"),
            c = cls(2, "x")
        )
    };
    let e0 = |x: &str, y: &str| format!("(and (rel {EDGE} {x} {y}) {})", step(&p, x, y));
    let e1 = |x: &str, y: &str| format!("(and (rel {EDGE} {x} {y}) {})", step(&q, x, y));
    // exactly one of the four directed variants holds for every edge
    let variants = [e0("u", "v"), e0("v", "u"), e1("u", "v"), e1("v", "u")];
    let exactly_one: Vec<String> = (0..4)
        .map(|i| {
            let parts: Vec<String> = (0..4)
                .map(|j| if i == j { variants[j].clone() } else { format!("(not {})", variants[j]) })
                .collect();
            format!("(and {})", parts.join(" "))
        })
        .collect();
    let once = format!(
        "(forallF u (forallF v (or (not (rel {EDGE} u v)) {})))",
        exactly_one.join(" ")
    );
    let chi = f(&format!("(and {} {} {once})", partition(&p), partition(&q)));
    let scheme = DefinitionScheme {
        output: Signature::new([(E0, 2), (E1, 2)]).expect("static"),
        chi,
        delta: ("x".into(), Formula::True),
        phis: vec![
            (vec!["x0".into(), "x1".into()], f(&e0("x0", "x1"))),
            (vec!["x0".into(), "x1".into()], f(&e1("x0", "x1"))),
        ],
    };
    Transduction::new(edge_signature(), 1, 6, scheme).expect("orientation scheme")
}

/// An incidence structure laid out in the directed `(m+1)×(n+1)` grid:
/// `a_i ↦ (i+1, 0)`, `e_k ↦ (0, k+1)`, `I'_l = {(i+1, k+1) : (a_i, e_k) ∈ in_l}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCode {
    pub rows: usize,
    pub cols: usize,
    pub signature: Vec<Symbol>,
    pub a_names: Vec<String>,
    pub e_names: Vec<String>,
    pub a_prime: BTreeSet<(usize, usize)>,
    pub e_prime: BTreeSet<(usize, usize)>,
    /// `P'_R` per original symbol.
    pub labels: BTreeMap<String, BTreeSet<(usize, usize)>>,
    /// `I'_l` per position.
    pub positions: Vec<BTreeSet<(usize, usize)>>,
}

pub fn grid_encode(a: &Structure) -> GridCode {
    grid_encode_incidence(&to_incidence(a))
}

pub fn grid_encode_incidence(inc: &IncidenceStructure) -> GridCode {
    let s = &inc.structure;
    let (m, n) = (inc.a_part.len(), inc.e_part.len());
    let row: BTreeMap<usize, usize> = inc.a_part.iter().enumerate().map(|(i, &a)| (a, i + 1)).collect();
    let col: BTreeMap<usize, usize> = inc.e_part.iter().enumerate().map(|(k, &e)| (e, k + 1)).collect();
    let r = inc.original.max_arity();
    let mut labels: BTreeMap<String, BTreeSet<(usize, usize)>> =
        inc.original.symbols().iter().map(|sym| (sym.name.clone(), BTreeSet::new())).collect();
    for (k, (name, _)) in inc.origin.iter().enumerate() {
        labels.get_mut(name).expect("known symbol").insert((0, k + 1));
    }
    let positions = (0..r)
        .map(|l| {
            s.relation(&position_symbol(l))
                .map(|rel| rel.iter().map(|t| (row[&t[0]], col[&t[1]])).collect())
                .unwrap_or_default()
        })
        .collect();
    GridCode {
        rows: m + 1,
        cols: n + 1,
        signature: inc.original.symbols().to_vec(),
        a_names: inc.a_part.iter().map(|&x| s.element(x).to_string()).collect(),
        e_names: inc.e_part.iter().map(|&x| s.element(x).to_string()).collect(),
        a_prime: (1..=m).map(|i| (i, 0)).collect(),
        e_prime: (1..=n).map(|k| (0, k)).collect(),
        labels,
        positions,
    }
}

impl GridCode {
    pub fn original(&self) -> Result<Signature> {
        Signature::from_symbols(self.signature.clone())
    }

    /// Orientation parameters of the underlying grid, over the vertex
    /// order of [`Graph::grid`].
    pub fn orientation(&self) -> GridParams {
        let mut p: [BTreeSet<usize>; 3] = Default::default();
        let mut q: [BTreeSet<usize>; 3] = Default::default();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = i * self.cols + k;
                p[i % 3].insert(v);
                q[k % 3].insert(v);
            }
        }
        GridParams { p, q }
    }

    /// The undirected grid expanded by the unary sets `A'`, `E'`, `P'_R`, `I'_l`.
    pub fn to_structure(&self) -> Result<Structure> {
        let g = Graph::grid(self.rows, self.cols);
        let mut extra = vec![Symbol::new("A'", 1), Symbol::new("E'", 1)];
        let mut sets = vec![&self.a_prime, &self.e_prime];
        for (name, cells) in &self.labels {
            extra.push(Symbol::new(format!("{}'", label_symbol(name)), 1));
            sets.push(cells);
        }
        for (l, cells) in self.positions.iter().enumerate() {
            extra.push(Symbol::new(format!("I'_{l}"), 1));
            sets.push(cells);
        }
        let cols = self.cols;
        let rels = extra
            .into_iter()
            .zip(sets)
            .map(|(sym, cells)| (sym, cells.iter().map(|&(i, k)| vec![i * cols + k]).collect()))
            .collect();
        g.structure().expanded(rels)
    }
}

/// Reads the incidence structure back off the grid parameters.
pub fn grid_decode(code: &GridCode) -> Result<IncidenceStructure> {
    let original = code.original()?;
    let bad = |msg: String| Err(Error::Structural(format!("inconsistent grid code: {msg}")));
    let (m, n) = (code.rows.saturating_sub(1), code.cols.saturating_sub(1));
    if code.rows == 0 || code.cols == 0 {
        return bad("grid has no cells".into());
    }
    if code.a_names.len() != m || code.e_names.len() != n {
        return bad(format!("{m}×{n} interior but {} / {} names", code.a_names.len(), code.e_names.len()));
    }
    if code.a_prime != (1..=m).map(|i| (i, 0)).collect() || code.e_prime != (1..=n).map(|k| (0, k)).collect() {
        return bad("A' and E' must be the first column and row without the corner".into());
    }
    if code.positions.len() != original.max_arity() {
        return bad(format!("{} position sets for maximal arity {}", code.positions.len(), original.max_arity()));
    }
    let mut symbol_of: Vec<Option<&str>> = vec![None; n];
    for sym in original.symbols() {
        let cells = code.labels.get(&sym.name).map_or_else(BTreeSet::new, Clone::clone);
        for (i, k) in cells {
            if i != 0 || k == 0 || k > n {
                return bad(format!("label cell ({i},{k}) outside E'"));
            }
            if symbol_of[k - 1].replace(&sym.name).is_some() {
                return bad(format!("column {k} carries two labels"));
            }
        }
    }
    if let Some(name) = code.labels.keys().find(|name| original.index_of(name).is_none()) {
        return bad(format!("label for unknown symbol {name}"));
    }
    let sig = incidence_signature(&original);
    let mut names = code.a_names.clone();
    names.extend(code.e_names.iter().cloned());
    let mut rels = vec![BTreeSet::new(); sig.len()];
    let mut filled = vec![vec![0usize; original.max_arity()]; n];
    for (l, cells) in code.positions.iter().enumerate() {
        let r = sig.index_of(&position_symbol(l)).expect("position symbol");
        for &(i, k) in cells {
            if i == 0 || i > m || k == 0 || k > n {
                return bad(format!("I'_{l} cell ({i},{k}) outside the interior"));
            }
            filled[k - 1][l] += 1;
            rels[r].insert(vec![i - 1, m + k - 1]);
        }
    }
    for k in 0..n {
        let Some(name) = symbol_of[k] else {
            return bad(format!("column {} carries no label", k + 1));
        };
        let arity = original.arity(name).expect("known");
        for (l, &c) in filled[k].iter().enumerate() {
            if c != usize::from(l < arity) {
                return bad(format!("column {} has {c} marks in I'_{l}", k + 1));
            }
        }
        let p = sig.index_of(&label_symbol(name)).expect("label symbol");
        rels[p].insert(vec![m + k]);
    }
    let structure = Structure::from_named(sig, names, rels)?;
    Ok(split(structure, original))
}
