//! Seeded generators for property tests and experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{vertex_names, Graph};
use crate::structure::{Signature, Structure, Symbol};
use crate::tree::TreeDomain;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A structure with up to `max_elems` elements over 1–3 symbols of arity
/// at most `max_arity`, each relation holding a few random tuples.
pub fn random_structure(r: &mut Rng64, max_elems: usize, max_arity: usize) -> Structure {
    let n = r.gen_range(0..=max_elems);
    let nsym = r.gen_range(1..=3);
    let symbols: Vec<Symbol> = (0..nsym)
        .map(|i| Symbol::new(["R", "S", "T"][i], r.gen_range(1..=max_arity)))
        .collect();
    let sig = Signature::from_symbols(symbols.clone()).expect("distinct names");
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut s = Structure::new(sig, names).expect("distinct");
    if n == 0 {
        return s;
    }
    for (ri, sym) in s.signature().symbols().to_vec().iter().enumerate() {
        let count = r.gen_range(0..=n + 2);
        for _ in 0..count {
            let t: Vec<usize> = (0..sym.arity).map(|_| r.gen_range(0..n)).collect();
            s.add_tuple_idx(ri, t).expect("in range");
        }
    }
    s
}

/// G(n, p) on vertices `v1..vn`.
pub fn random_graph(r: &mut Rng64, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(vertex_names(n), &edges).expect("simple")
}

/// A connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(r: &mut Rng64, n: usize, p: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = r.gen_range(0..i);
        edges.push((order[j], order[i]));
    }
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(vertex_names(n), &edges).expect("simple")
}

/// A random rooted tree with `n` vertices (random recursive tree).
pub fn random_tree_domain(r: &mut Rng64, n: usize) -> TreeDomain {
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| (i > 0).then(|| r.gen_range(0..i)))
        .collect();
    TreeDomain::from_parents(&parents).expect("tree").0
}

/// A random tree of height at most `h` with `n` vertices.
pub fn random_tree_of_height(r: &mut Rng64, n: usize, h: usize) -> TreeDomain {
    let mut parents: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut depth: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 {
            parents.push(None);
            depth.push(0);
            continue;
        }
        let eligible: Vec<usize> = (0..i).filter(|&j| depth[j] + 1 < h).collect();
        let p = *eligible.choose(r).expect("root always eligible when h > 1");
        parents.push(Some(p));
        depth.push(depth[p] + 1);
    }
    TreeDomain::from_parents(&parents).expect("tree").0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible() {
        let a = random_structure(&mut rng(7), 8, 3);
        let b = random_structure(&mut rng(7), 8, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn connected_graphs_are_connected() {
        let mut r = rng(1);
        for n in 1..9 {
            assert!(random_connected_graph(&mut r, n, 0.2).is_connected());
        }
    }

    #[test]
    fn bounded_height_trees() {
        let mut r = rng(3);
        for _ in 0..20 {
            assert!(random_tree_of_height(&mut r, 9, 3).height() <= 3);
        }
    }
}
