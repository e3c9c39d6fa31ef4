//! Minors as four parameter sets: deleted vertices, deleted edges,
//! contracted edges, and one representative per contracted class.

use std::collections::{BTreeSet, HashSet};

use crate::error::{check_budget, Result};
use crate::graph::{Graph, UnionFind, EDGE};
use crate::incidence::{graph_incidence, label_symbol, position_symbol, IncidenceStructure};
use crate::iso::{canonical_form, CanonicalForm};
use crate::logic::Formula;
use crate::structure::Structure;
use crate::transduction::{param_symbol, DefinitionScheme, Transduction};

/// Edges are unordered pairs stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MinorParams {
    pub deleted_vertices: BTreeSet<usize>,
    pub deleted_edges: BTreeSet<(usize, usize)>,
    pub contracted: BTreeSet<(usize, usize)>,
    pub representatives: BTreeSet<usize>,
}

fn norm((u, v): (usize, usize)) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Deletes, then contracts. `None` when the parameters are inconsistent:
/// unknown vertices or non-edges, an edge both deleted and contracted, a
/// contracted edge at a deleted vertex, or not exactly one representative
/// per contracted class. Vertices untouched by contractions represent
/// themselves. The minor's vertices keep their representatives' names.
pub fn minor_apply(g: &Graph, p: &MinorParams) -> Option<Graph> {
    let n = g.vertex_count();
    let edges: BTreeSet<(usize, usize)> = g.edges().into_iter().map(norm).collect();
    let in_range = |v: &usize| *v < n;
    if !p.deleted_vertices.iter().all(in_range) || !p.representatives.iter().all(in_range) {
        return None;
    }
    let deleted: BTreeSet<(usize, usize)> = p.deleted_edges.iter().copied().map(norm).collect();
    let contracted: BTreeSet<(usize, usize)> = p.contracted.iter().copied().map(norm).collect();
    if !deleted.is_subset(&edges) || !contracted.is_subset(&edges) || !deleted.is_disjoint(&contracted) {
        return None;
    }
    let alive = |v: usize| !p.deleted_vertices.contains(&v);
    if contracted.iter().any(|&(u, v)| !alive(u) || !alive(v)) {
        return None;
    }
    let mut uf = UnionFind::new(n);
    for &(u, v) in &contracted {
        uf.union(u, v);
    }
    let mut rep_of = vec![usize::MAX; n];
    for &r in &p.representatives {
        if !alive(r) {
            return None;
        }
        let top = uf.find(r);
        if rep_of[top] != usize::MAX {
            return None;
        }
        rep_of[top] = r;
    }
    let touched: BTreeSet<usize> = contracted.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut reps: Vec<usize> = p.representatives.iter().copied().collect();
    for v in (0..n).filter(|&v| alive(v) && !touched.contains(&v)) {
        if rep_of[v] == usize::MAX {
            rep_of[v] = v;
            reps.push(v);
        }
    }
    reps.sort_unstable();
    let mut class = vec![usize::MAX; n];
    for v in (0..n).filter(|&v| alive(v)) {
        let r = rep_of[uf.find(v)];
        if r == usize::MAX {
            return None;
        }
        class[v] = reps.binary_search(&r).expect("representative");
    }
    let out: Vec<(usize, usize)> = edges
        .iter()
        .filter(|e| !deleted.contains(e) && !contracted.contains(e))
        .filter(|&&(u, v)| alive(u) && alive(v) && class[u] != class[v])
        .map(|&(u, v)| (class[u], class[v]))
        .collect();
    let names: Vec<String> = reps.iter().map(|&r| g.name(r).to_string()).collect();
    Some(Graph::new(names, &out).expect("simple minor"))
}

/// Every minor of `g` up to isomorphism, by running [`minor_apply`] over
/// all deletion and contraction choices with the least vertex of each class
/// as representative (other representatives only rename vertices).
pub fn minor_sweep(g: &Graph, budget: usize) -> Result<Vec<Graph>> {
    check_budget("vertices for minor sweep", budget, g.vertex_count())?;
    let n = g.vertex_count();
    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(norm).collect();
    let mut seen: HashSet<CanonicalForm> = HashSet::new();
    let mut out = Vec::new();
    for dead in 0u32..1 << n {
        let live: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(u, v)| dead >> u & 1 == 0 && dead >> v & 1 == 0)
            .collect();
        let mut state = vec![0u8; live.len()];
        loop {
            let mut p = MinorParams {
                deleted_vertices: (0..n).filter(|&v| dead >> v & 1 == 1).collect(),
                ..Default::default()
            };
            let mut uf = UnionFind::new(n);
            for (&e, &s) in live.iter().zip(&state) {
                match s {
                    1 => {
                        p.deleted_edges.insert(e);
                    }
                    2 => {
                        p.contracted.insert(e);
                        uf.union(e.0, e.1);
                    }
                    _ => {}
                }
            }
            let touched: BTreeSet<usize> = p.contracted.iter().flat_map(|&(u, v)| [u, v]).collect();
            p.representatives = touched
                .iter()
                .copied()
                .filter(|&v| touched.iter().all(|&u| u >= v || uf.find(u) != uf.find(v)))
                .collect();
            let m = minor_apply(g, &p).expect("consistent sweep parameters");
            if seen.insert(canonical_form(m.structure())) {
                out.push(m);
            }
            // next ternary state
            let Some(i) = state.iter().position(|&s| s < 2) else {
                break;
            };
            state[i] += 1;
            state[..i].iter_mut().for_each(|s| *s = 0);
        }
    }
    Ok(out)
}

fn f(s: &str) -> Formula {
    s.parse().expect("static formula")
}

/// The 4-parameter transduction `G_in ↦ minor`, with `param0` deleted
/// vertices, `param1` deleted edges, `param2` contracted edges and `param3`
/// representatives, over [`graph_incidence`].
pub fn minor_transduction() -> Transduction {
    let inc_sig = graph_incidence(&Graph::edgeless(0)).structure.signature().clone();
    let pe = label_symbol(EDGE);
    let (in0, in1) = (position_symbol(0), position_symbol(1));
    let par = |j: usize, x: &str| format!("(rel {} {x})", param_symbol(j));
    let vertex = |x: &str| format!("(not (rel {pe} {x}))");
    let ends = |e: &str, u: &str, v: &str| {
        format!("(or (and (rel {in0} {u} {e}) (rel {in1} {v} {e})) (and (rel {in0} {v} {e}) (rel {in1} {u} {e})))")
    };
    // x and y lie in one class of the contracted edges
    let same = |x: &str, y: &str| {
        format!(
            "(forall X (or (not (sub {x} X)) (sub {y} X) \
             (not (forallF e (forallF u (forallF v (or (not {c}) (not {ends}) (not (sub u X)) (sub v X))))))))",
            c = par(2, "e"),
            ends = ends("e", "u", "v"),
        )
    };
    let untouched = |x: &str| {
        format!(
            "(not (existsF e (existsF w (and {c} {ends}))))",
            c = par(2, "e"),
            ends = ends("e", x, "w"),
        )
    };
    let chi = format!(
        "(and \
         (forallF x (or (not (or {p0} {p3})) {vx})) \
         (forallF x (or (not (or {p1} {p2})) (rel {pe} x))) \
         (forallF x (not (and {p1} {p2}))) \
         (forallF e (forallF u (forallF v (or (not {c}) (not {ends}) (not {p0u})))))
         (forallF x (or (not {vx}) {p0} {free_x} (existsF r (and {p3r} {same_xr})))) \
         (forallF r (forallF s (or (not {p3r}) (not {p3s}) (sub r s) (not {same_rs})))) \
         (forallF r (not (and {p3r} {p0r}))))",
        p0 = par(0, "x"),
        p1 = par(1, "x"),
        p2 = par(2, "x"),
        p3 = par(3, "x"),
        vx = vertex("x"),
        c = par(2, "e"),
        ends = ends("e", "u", "v"),
        p0u = par(0, "u"),
        p3r = par(3, "r"),
        p3s = par(3, "s"),
        p0r = par(0, "r"),
        same_xr = same("x", "r"),
        free_x = untouched("x"),
        same_rs = same("r", "s"),
    );
    let phi = format!(
        "(and (not (sub x0 x1)) (existsF e (existsF u (existsF v (and (rel {pe} e) (not {p1e}) (not {p2e}) {ends} \
         (not {p0u}) (not {p0v}) {same0} {same1})))))",
        p1e = par(1, "e"),
        p2e = par(2, "e"),
        ends = ends("e", "u", "v"),
        p0u = par(0, "u"),
        p0v = par(0, "v"),
        same0 = same("x0", "u"),
        same1 = same("x1", "v"),
    );
    let scheme = DefinitionScheme {
        output: crate::graph::edge_signature(),
        chi: f(&chi),
        delta: (
            "x".into(),
            f(&format!("(and (or {} {}) {} (not {}))", par(3, "x"), untouched("x"), vertex("x"), par(0, "x"))),
        ),
        phis: vec![(vec!["x0".into(), "x1".into()], f(&phi))],
    };
    Transduction::new(inc_sig, 1, 4, scheme).expect("minor scheme")
}

/// The parameter bitmasks of `p` over `graph_incidence(g)`.
pub fn minor_param_masks(g: &Graph, inc: &IncidenceStructure, p: &MinorParams) -> Vec<u64> {
    let s: &Structure = &inc.structure;
    let vertex = |v: usize| s.index_of(g.name(v)).expect("vertex element");
    let edge = |(u, v): (usize, usize)| {
        let (u, v) = norm((u, v));
        s.index_of(&crate::incidence::tuple_element(EDGE, &[g.name(u), g.name(v)])).expect("edge element")
    };
    let mask = |xs: Vec<usize>| xs.into_iter().fold(0u64, |m, x| m | 1 << x);
    vec![
        mask(p.deleted_vertices.iter().map(|&v| vertex(v)).collect()),
        mask(p.deleted_edges.iter().map(|&e| edge(e)).collect()),
        mask(p.contracted.iter().map(|&e| edge(e)).collect()),
        mask(p.representatives.iter().map(|&v| vertex(v)).collect()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::isomorphic;
    use crate::minor::all_minors;
    use crate::transduction::ApplyOptions;

    fn forms(gs: &[Graph]) -> BTreeSet<CanonicalForm> {
        gs.iter().map(|g| canonical_form(g.structure())).collect()
    }

    #[test]
    fn basic_cases() {
        let k3 = Graph::complete(3);
        assert_eq!(minor_apply(&k3, &MinorParams::default()).unwrap(), k3);
        let p = MinorParams {
            contracted: BTreeSet::from([(0, 1)]),
            representatives: BTreeSet::from([0, 2]),
            ..Default::default()
        };
        let m = minor_apply(&k3, &p).unwrap();
        assert!(isomorphic(m.structure(), Graph::complete(2).structure()));
        let two_reps = MinorParams {
            representatives: BTreeSet::from([0, 1, 2]),
            ..p.clone()
        };
        assert!(minor_apply(&k3, &two_reps).is_none());
        let both = MinorParams {
            deleted_edges: BTreeSet::from([(1, 0)]),
            ..p
        };
        assert!(minor_apply(&k3, &both).is_none());
    }

    #[test]
    fn literal_parameter_sweep_on_path() {
        // every combination of the four sets on P3
        let g = Graph::path(2);
        let edges: Vec<(usize, usize)> = g.edges().into_iter().map(norm).collect();
        let subsets = |n: usize| (0u32..1 << n).collect::<Vec<_>>();
        let mut found = Vec::new();
        for dv in subsets(3) {
            for de in subsets(2) {
                for ce in subsets(2) {
                    for rv in subsets(3) {
                        let pick = |m: u32| (0..3).filter(move |&i| m >> i & 1 == 1);
                        let p = MinorParams {
                            deleted_vertices: pick(dv).collect(),
                            deleted_edges: pick(de).filter(|&i| i < 2).map(|i| edges[i]).collect(),
                            contracted: pick(ce).filter(|&i| i < 2).map(|i| edges[i]).collect(),
                            representatives: pick(rv).collect(),
                        };
                        found.extend(minor_apply(&g, &p));
                    }
                }
            }
        }
        assert_eq!(forms(&found), forms(&all_minors(&g, 10).unwrap()));
    }

    #[test]
    fn sweep_equals_minor_closure() {
        for g in [Graph::path(3), Graph::complete(4), Graph::cycle(5), Graph::edgeless(2)] {
            assert_eq!(forms(&minor_sweep(&g, 10).unwrap()), forms(&all_minors(&g, 10).unwrap()));
        }
    }

    #[test]
    fn transduction_matches_apply() {
        let t = minor_transduction();
        let opts = ApplyOptions::default();
        for g in [Graph::path(2), Graph::complete(3)] {
            let inc = graph_incidence(&g);
            let n = g.vertex_count();
            let mut checked = 0;
            for dead in 0u32..1 << n {
                for c in 0u32..1 << g.edge_count() {
                    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(norm).collect();
                    let contracted: BTreeSet<(usize, usize)> =
                        (0..edges.len()).filter(|&i| c >> i & 1 == 1).map(|i| edges[i]).collect();
                    for reps in 0u32..1 << n {
                        let p = MinorParams {
                            deleted_vertices: (0..n).filter(|&v| dead >> v & 1 == 1).collect(),
                            deleted_edges: BTreeSet::new(),
                            contracted: contracted.clone(),
                            representatives: (0..n).filter(|&v| reps >> v & 1 == 1).collect(),
                        };
                        let direct = minor_apply(&g, &p);
                        let masks = minor_param_masks(&g, &inc, &p);
                        let via = t.apply_with_params(&inc.structure, &masks, &opts).unwrap();
                        assert_eq!(via.is_some(), direct.is_some(), "{p:?}");
                        if let (Some(a), Some(b)) = (via, direct) {
                            assert_eq!(a, b.into_structure());
                            checked += 1;
                        }
                    }
                }
            }
            assert!(checked > 3);
        }
    }

    #[test]
    fn transduction_image_on_an_edge() {
        let g = Graph::path(1);
        let inc = graph_incidence(&g);
        let outs = minor_transduction().apply(&inc.structure, &ApplyOptions::default()).unwrap();
        assert_eq!(forms(&outs.into_iter().map(|s| Graph::from_structure(&s, false).unwrap()).collect::<Vec<_>>()),
            forms(&all_minors(&g, 10).unwrap()));
    }
}
