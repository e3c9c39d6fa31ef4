//! Incidence encoding: one new element per relation tuple, linked to its
//! components by the position relations `in_i`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, EDGE};
use crate::structure::{Signature, Structure, Symbol};

pub fn label_symbol(rel: &str) -> String {
    format!("P_{rel}")
}

pub fn position_symbol(i: usize) -> String {
    format!("in_{i}")
}

/// Name of the incidence element standing for `rel(tuple)`.
pub fn tuple_element(rel: &str, names: &[&str]) -> String {
    format!("e:{rel}({})", names.join(","))
}

/// An incidence structure together with its bipartition and the origin of
/// every tuple element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceStructure {
    pub structure: Structure,
    pub a_part: Vec<usize>,
    pub e_part: Vec<usize>,
    /// For each entry of `e_part`: (original symbol, tuple of original names).
    pub origin: Vec<(String, Vec<String>)>,
    pub original: Signature,
}

pub fn incidence_signature(sig: &Signature) -> Signature {
    let r = sig.max_arity();
    Signature::from_symbols(
        sig.symbols()
            .iter()
            .map(|s| Symbol::new(label_symbol(&s.name), 1))
            .chain((0..r).map(|i| Symbol::new(position_symbol(i), 2))),
    )
    .expect("incidence signature")
}

pub fn to_incidence(a: &Structure) -> IncidenceStructure {
    let sig = incidence_signature(a.signature());
    let mut names: Vec<String> = a.domain().to_vec();
    let n = names.len();
    let mut rels = vec![BTreeSet::new(); sig.len()];
    let mut origin_by_index = Vec::new();
    for (sym, tuples) in a.signature().symbols().iter().zip(a.relations()) {
        let p = sig.index_of(&label_symbol(&sym.name)).expect("label");
        for t in tuples {
            let comp: Vec<&str> = t.iter().map(|&x| a.element(x)).collect();
            let e = names.len();
            names.push(tuple_element(&sym.name, &comp));
            rels[p].insert(vec![e]);
            for (i, &x) in t.iter().enumerate() {
                let r = sig.index_of(&position_symbol(i)).expect("position");
                rels[r].insert(vec![x, e]);
            }
            origin_by_index.push((sym.name.clone(), comp.iter().map(|s| s.to_string()).collect()));
        }
    }
    let total = names.len();
    let structure = Structure::from_named(sig, names.clone(), rels).expect("fresh tuple names");
    let a_part: Vec<usize> = (0..n).map(|i| structure.index_of(&names[i]).expect("a")).collect();
    let mut e: Vec<(usize, (String, Vec<String>))> = (n..total)
        .map(|i| (structure.index_of(&names[i]).expect("e"), origin_by_index[i - n].clone()))
        .collect();
    e.sort();
    let mut a_sorted = a_part;
    a_sorted.sort_unstable();
    IncidenceStructure {
        structure,
        a_part: a_sorted,
        e_part: e.iter().map(|(i, _)| *i).collect(),
        origin: e.into_iter().map(|(_, o)| o).collect(),
        original: a.signature().clone(),
    }
}

/// Incidence structure of an undirected graph with a single element per
/// edge `{u, v}` (`u < v`), as used for minors.
pub fn graph_incidence(g: &Graph) -> IncidenceStructure {
    let sig = incidence_signature(g.structure().signature());
    let mut names: Vec<String> = g.structure().domain().to_vec();
    let mut rels = vec![BTreeSet::new(); sig.len()];
    let p = sig.index_of(&label_symbol(EDGE)).expect("label");
    let in0 = sig.index_of(&position_symbol(0)).expect("in_0");
    let in1 = sig.index_of(&position_symbol(1)).expect("in_1");
    for (u, v) in g.edges() {
        let e = names.len();
        names.push(tuple_element(EDGE, &[g.name(u), g.name(v)]));
        rels[p].insert(vec![e]);
        rels[in0].insert(vec![u, e]);
        rels[in1].insert(vec![v, e]);
    }
    let structure = Structure::from_named(sig, names, rels).expect("edge names");
    split(structure, g.structure().signature().clone())
}

/// Recovers bipartition and origins of an incidence structure by looking at
/// the `P_R` labels.
pub fn split(structure: Structure, original: Signature) -> IncidenceStructure {
    let mut e_part = Vec::new();
    let mut origin = Vec::new();
    let labels: Vec<(usize, &str)> = original
        .symbols()
        .iter()
        .filter_map(|s| structure.signature().index_of(&label_symbol(&s.name)).map(|r| (r, s.name.as_str())))
        .collect();
    for e in 0..structure.len() {
        let mut names = Vec::new();
        for &(r, name) in &labels {
            if structure.relation_at(r).contains(&vec![e]) {
                names.push(name);
            }
        }
        if let Some(&name) = names.first() {
            let arity = original.arity(name).expect("label of known symbol");
            let comps = (0..arity)
                .map(|i| {
                    structure
                        .relation(&position_symbol(i))
                        .and_then(|r| r.iter().find(|t| t[1] == e))
                        .map(|t| structure.element(t[0]).to_string())
                        .unwrap_or_default()
                })
                .collect();
            e_part.push(e);
            origin.push((name.to_string(), comps));
        }
    }
    let a_part = (0..structure.len()).filter(|x| !e_part.contains(x)).collect();
    IncidenceStructure {
        structure,
        a_part,
        e_part,
        origin,
        original,
    }
}

/// Rebuilds the original structure from the `P_R` labels and the `in_i`
/// links; the bipartition is read off the labels.
pub fn from_incidence(inc: &Structure, original: &Signature) -> Result<Structure> {
    let s = inc;
    let mut labels_of = vec![Vec::new(); s.len()];
    for sym in original.symbols() {
        let r = s
            .relation(&label_symbol(&sym.name))
            .ok_or_else(|| Error::Signature(format!("missing {}", label_symbol(&sym.name))))?;
        for t in r {
            labels_of[t[0]].push(sym);
        }
    }
    let is_e: Vec<bool> = labels_of.iter().map(|l| !l.is_empty()).collect();
    if let Some(e) = labels_of.iter().position(|l| l.len() > 1) {
        return Err(Error::Structural(format!("{} carries several labels", s.element(e))));
    }
    let a_names: Vec<String> = (0..s.len()).filter(|&x| !is_e[x]).map(|x| s.element(x).to_string()).collect();
    let mut out = Structure::new(original.clone(), a_names)?;
    let r = original.max_arity();
    let mut comps: Vec<Vec<Option<usize>>> = vec![vec![None; r]; s.len()];
    for i in 0..r {
        let Some(rel) = s.relation(&position_symbol(i)) else {
            continue;
        };
        for t in rel {
            let (a, e) = (t[0], t[1]);
            if is_e[a] || !is_e[e] {
                return Err(Error::Structural(format!(
                    "{} links {} to {} across the wrong sorts",
                    position_symbol(i),
                    s.element(a),
                    s.element(e)
                )));
            }
            if comps[e][i].replace(a).is_some() {
                return Err(Error::Structural(format!(
                    "{} has two components at position {i}",
                    s.element(e)
                )));
            }
        }
    }
    for e in 0..s.len() {
        let Some(sym) = labels_of[e].first() else {
            continue;
        };
        let mut names = Vec::with_capacity(sym.arity);
        for i in 0..r {
            match (i < sym.arity, comps[e][i]) {
                (true, Some(a)) => names.push(s.element(a)),
                (true, None) => {
                    return Err(Error::Structural(format!(
                        "{} lacks a component at position {i}",
                        s.element(e)
                    )))
                }
                (false, Some(_)) => {
                    return Err(Error::Structural(format!(
                        "{} has a component beyond arity {}",
                        s.element(e),
                        sym.arity
                    )))
                }
                (false, None) => {}
            }
        }
        out.add_tuple(&sym.name, &names)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::isomorphic;

    fn example() -> Structure {
        let sig = Signature::new([("R", 3)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b", "c", "d", "e"]).unwrap();
        for last in ["c", "d", "e"] {
            s.add_tuple("R", &["a", "b", last]).unwrap();
        }
        s
    }

    #[test]
    fn example_incidence() {
        let inc = to_incidence(&example());
        assert_eq!(inc.e_part.len(), 3);
        assert_eq!(inc.a_part.len(), 5);
        let s = &inc.structure;
        assert_eq!(s.relation("P_R").unwrap().len(), 3);
        let in2: Vec<(String, String)> = s
            .relation("in_2")
            .unwrap()
            .iter()
            .map(|t| (s.element(t[0]).to_string(), s.element(t[1]).to_string()))
            .collect();
        assert_eq!(in2.len(), 3);
        assert!(in2.contains(&("c".into(), "e:R(a,b,c)".into())));
        assert_eq!(from_incidence(s, &inc.original).unwrap(), example());
    }

    #[test]
    fn empty_relations() {
        let s = Structure::new(Signature::new([("R", 2)]).unwrap(), ["a"]).unwrap();
        let inc = to_incidence(&s);
        assert!(inc.e_part.is_empty());
        assert_eq!(inc.structure.tuple_count(), 0);
        assert_eq!(from_incidence(&inc.structure, &inc.original).unwrap(), s);
    }

    #[test]
    fn shared_tuple_gives_two_elements() {
        let sig = Signature::new([("R", 2), ("S", 2)]).unwrap();
        let mut s = Structure::new(sig, ["a", "b"]).unwrap();
        s.add_tuple("R", &["a", "b"]).unwrap();
        s.add_tuple("S", &["a", "b"]).unwrap();
        assert_eq!(to_incidence(&s).e_part.len(), 2);
    }

    #[test]
    fn missing_position_is_structural() {
        let inc = to_incidence(&example());
        let mut broken = inc.structure.clone();
        let sig = broken.signature().clone();
        let r = sig.index_of("in_1").unwrap();
        let keep: BTreeSet<Vec<usize>> = broken.relation_at(r).iter().skip(1).cloned().collect();
        broken = Structure::from_indexed(
            sig.clone(),
            broken.domain().to_vec(),
            broken
                .relations()
                .iter()
                .enumerate()
                .map(|(i, t)| if i == r { keep.clone() } else { t.clone() })
                .collect(),
        );
        assert!(matches!(from_incidence(&broken, &inc.original), Err(Error::Structural(_))));
    }

    #[test]
    fn graph_incidence_one_element_per_edge() {
        let g = Graph::complete(3);
        let inc = graph_incidence(&g);
        assert_eq!(inc.e_part.len(), 3);
        assert!(isomorphic(&Graph::symmetrized(&from_incidence(&inc.structure, &inc.original).unwrap()).unwrap().into_structure(), g.structure()));
    }
}
