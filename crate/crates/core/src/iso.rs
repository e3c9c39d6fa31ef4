//! Canonical forms and isomorphism testing by colour refinement with
//! individualisation and twin pruning.

use std::collections::BTreeMap;

use crate::structure::{Structure, Symbol};

/// A labelling-independent encoding of a structure: equal iff isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    symbols: Vec<Symbol>,
    size: usize,
    constants: Vec<(String, usize)>,
    relations: Vec<Vec<Vec<usize>>>,
}

impl CanonicalForm {
    pub fn size(&self) -> usize {
        self.size
    }
}

pub fn canonical_form(s: &Structure) -> CanonicalForm {
    canonical_labelling(s).0
}

pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    a.len() == b.len()
        && a.tuple_count() == b.tuple_count()
        && a.signature() == b.signature()
        && canonical_form(a) == canonical_form(b)
}

/// An isomorphism `a → b` as an index map, if one exists.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Option<Vec<usize>> {
    if a.signature() != b.signature() || a.len() != b.len() {
        return None;
    }
    let (ca, la) = canonical_labelling(a);
    let (cb, lb) = canonical_labelling(b);
    if ca != cb {
        return None;
    }
    let mut inv_b = vec![0; lb.len()];
    for (v, &pos) in lb.iter().enumerate() {
        inv_b[pos] = v;
    }
    Some(la.iter().map(|&pos| inv_b[pos]).collect())
}

/// Canonical form plus the map element → canonical position.
pub fn canonical_labelling(s: &Structure) -> (CanonicalForm, Vec<usize>) {
    let ctx = Ctx::new(s);
    let colours = ctx.refine(ctx.initial());
    let mut best: Option<(Vec<Vec<Vec<usize>>>, Vec<usize>)> = None;
    ctx.search(colours, &mut best);
    let (relations, labelling) = best.unwrap_or_default();
    let mut constants: Vec<(String, usize)> = s
        .constants()
        .iter()
        .map(|(c, &e)| (c.clone(), labelling[e]))
        .collect();
    constants.sort();
    (
        CanonicalForm {
            symbols: s.signature().symbols().to_vec(),
            size: s.len(),
            constants,
            relations,
        },
        labelling,
    )
}

struct Ctx<'a> {
    s: &'a Structure,
    // per element: (relation, tuple index) occurrences
    occ: Vec<Vec<(usize, usize)>>,
    tuples: Vec<Vec<Vec<usize>>>,
}

impl<'a> Ctx<'a> {
    fn new(s: &'a Structure) -> Self {
        let tuples: Vec<Vec<Vec<usize>>> = s.relations().iter().map(|r| r.iter().cloned().collect()).collect();
        let mut occ = vec![Vec::new(); s.len()];
        for (r, ts) in tuples.iter().enumerate() {
            for (ti, t) in ts.iter().enumerate() {
                let mut seen: Vec<usize> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for v in seen {
                    occ[v].push((r, ti));
                }
            }
        }
        Ctx { s, occ, tuples }
    }

    fn initial(&self) -> Vec<usize> {
        let mut c = vec![0; self.s.len()];
        for (i, (_, &e)) in self.s.constants().iter().enumerate() {
            c[e] |= 1 << (i % 60);
        }
        c
    }

    /// Iterated refinement; colours are ranks of sorted signatures so the
    /// result does not depend on element names.
    fn refine(&self, mut colours: Vec<usize>) -> Vec<usize> {
        let n = colours.len();
        let mut classes = count_classes(&colours);
        loop {
            let sigs: Vec<(usize, Vec<(usize, Vec<usize>)>)> = (0..n)
                .map(|v| {
                    let mut m: Vec<(usize, Vec<usize>)> = self.occ[v]
                        .iter()
                        .map(|&(r, ti)| {
                            let t = &self.tuples[r][ti];
                            // positions of v are marked with usize::MAX
                            let enc = t
                                .iter()
                                .map(|&x| if x == v { usize::MAX } else { colours[x] })
                                .collect();
                            (r, enc)
                        })
                        .collect();
                    m.sort_unstable();
                    (colours[v], m)
                })
                .collect();
            let mut keys: Vec<&(usize, Vec<(usize, Vec<usize>)>)> = sigs.iter().collect();
            keys.sort();
            keys.dedup();
            let rank: BTreeMap<&(usize, Vec<(usize, Vec<usize>)>), usize> =
                keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
            colours = sigs.iter().map(|k| rank[k]).collect();
            let c = count_classes(&colours);
            if c == classes {
                return colours;
            }
            classes = c;
        }
    }

    fn swap_is_automorphism(&self, u: usize, v: usize) -> bool {
        let sw = |x: usize| if x == u { v } else if x == v { u } else { x };
        if self.s.constants().values().any(|&e| e == u || e == v) {
            return false;
        }
        for &(r, ti) in &self.occ[u] {
            let t: Vec<usize> = self.tuples[r][ti].iter().map(|&x| sw(x)).collect();
            if !self.s.relation_at(r).contains(&t) {
                return false;
            }
        }
        self.occ[u].len() == self.occ[v].len()
    }

    fn search(&self, colours: Vec<usize>, best: &mut Option<(Vec<Vec<Vec<usize>>>, Vec<usize>)>) {
        let n = colours.len();
        if count_classes(&colours) == n {
            let enc = self.encode(&colours);
            if best.as_ref().map_or(true, |(b, _)| enc < *b) {
                *best = Some((enc, colours));
            }
            return;
        }
        // first smallest non-singleton cell
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &colours {
            *sizes.entry(c).or_default() += 1;
        }
        let target = sizes
            .iter()
            .filter(|(_, &k)| k > 1)
            .min_by_key(|(&c, &k)| (k, c))
            .map(|(&c, _)| c)
            .expect("non-discrete");
        let cell: Vec<usize> = (0..n).filter(|&v| colours[v] == target).collect();
        let mut reps: Vec<usize> = Vec::new();
        for &v in &cell {
            if !reps.iter().any(|&r| self.swap_is_automorphism(r, v)) {
                reps.push(v);
            }
        }
        for v in reps {
            // individualise v: put it in front of its cell
            let mut c: Vec<usize> = colours.iter().map(|&x| 2 * x + 1).collect();
            c[v] = 2 * colours[v];
            let c = self.refine(c);
            self.search(c, best);
        }
    }

    fn encode(&self, perm: &[usize]) -> Vec<Vec<Vec<usize>>> {
        self.tuples
            .iter()
            .map(|ts| {
                let mut v: Vec<Vec<usize>> = ts.iter().map(|t| t.iter().map(|&x| perm[x]).collect()).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }
}

fn count_classes(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Keeps the first structure of every isomorphism class, in input order.
pub fn dedup_isomorphic(items: impl IntoIterator<Item = Structure>) -> Vec<Structure> {
    let mut seen = std::collections::HashSet::new();
    items
        .into_iter()
        .filter(|s| seen.insert(canonical_form(s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn relabelled_graphs_are_isomorphic() {
        let p = Graph::path(4);
        let q = p.structure().renamed(|n| format!("z{}", 9 - n[1..].parse::<usize>().unwrap())).unwrap();
        assert!(isomorphic(p.structure(), &q));
        let f = find_isomorphism(p.structure(), &q).unwrap();
        for t in p.structure().relation_at(0) {
            assert!(q.relation_at(0).contains(&vec![f[t[0]], f[t[1]]]));
        }
    }

    #[test]
    fn distinguishes_regular_graphs() {
        // C6 versus two triangles: both 2-regular on 6 vertices
        let c6 = Graph::cycle(6);
        let k3 = Graph::complete(3);
        let two = k3.structure().disjoint_union(k3.structure()).unwrap();
        assert!(!isomorphic(c6.structure(), &two));
        assert!(isomorphic(Graph::cycle(5).structure(), Graph::cycle(5).structure()));
    }

    #[test]
    fn symmetric_graphs_are_fast() {
        let e = Graph::edgeless(20);
        let k = Graph::complete(12);
        assert!(isomorphic(e.structure(), Graph::edgeless(20).structure()));
        assert!(isomorphic(k.structure(), Graph::complete(12).structure()));
        let g = Graph::grid(4, 4);
        assert!(isomorphic(g.structure(), Graph::grid(4, 4).structure()));
    }

    #[test]
    fn digraphs_on_three_vertices() {
        use crate::structure::Signature;
        let sig = Signature::new([("edg", 2)]).unwrap();
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).collect();
        let mut all = Vec::new();
        for mask in 0u32..(1 << 9) {
            let mut s = Structure::new(sig.clone(), ["a", "b", "c"]).unwrap();
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.add_tuple_idx(0, vec![u, v]).unwrap();
                }
            }
            all.push(s);
        }
        // binary relations with loops on 3 points up to isomorphism
        assert_eq!(dedup_isomorphic(all).len(), 104);
    }
}
