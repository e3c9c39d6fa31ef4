//! Partition refinements of incidence structures and their conversion into
//! tree decompositions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::decomposition::TreeDecomposition;
use crate::error::{Error, Result};
use crate::incidence::{position_symbol, split, IncidenceStructure};
use crate::logic::{EvalOptions, TypeContext, TypeOptions};
use crate::random::Rng64;
use crate::structure::{Signature, Structure};
use crate::transduction::{apply_basic, Transduction};
use crate::tree::{seq_string, ColouredTree, TreeDomain, TreeMode};

/// `(W_v, ≈_v)` per tree vertex; `≈_v` is stored as its list of classes,
/// whose union is `W_v`. Elements are indices of the incidence structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionRefinement {
    tree: TreeDomain,
    classes: Vec<Vec<BTreeSet<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementViolation {
    UnknownElement { node: String, index: usize },
    /// Classes at a vertex overlap or one of them is empty.
    NotPartition { node: String },
    RootIncomplete { missing: Vec<String> },
    ChildrenNotPartition { node: String },
    LeafNotSingleton { node: String },
    /// `x ≈_child y` but not `x ≈_parent y`.
    NotCoarsening { node: String, child: String, x: String, y: String },
    /// A class mixes A-elements with tuple elements.
    MixedClass { node: String, x: String, y: String },
    /// `x ≈_u y` although `witness` outside both blocks tells them apart.
    External { node: String, x: String, y: String, witness: String },
}

impl std::fmt::Display for RefinementViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use RefinementViolation::*;
        match self {
            UnknownElement { node, index } => write!(f, "vertex {node:?} mentions unknown element #{index}"),
            NotPartition { node } => write!(f, "classes at {node:?} overlap or are empty"),
            RootIncomplete { missing } => write!(f, "root misses {}", missing.join(", ")),
            ChildrenNotPartition { node } => write!(f, "children of {node:?} do not partition it"),
            LeafNotSingleton { node } => write!(f, "leaf {node:?} does not hold exactly one element"),
            NotCoarsening { node, child, x, y } => {
                write!(f, "{x} and {y} are equivalent at {child:?} but not at its parent {node:?}")
            }
            MixedClass { node, x, y } => write!(f, "class at {node:?} mixes {x} and {y}"),
            External { node, x, y, witness } => {
                write!(f, "{x} ≈ {y} at {node:?} but {witness} distinguishes them")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RefinementJson {
    pub tree: Vec<String>,
    pub classes: BTreeMap<String, Vec<Vec<String>>>,
}

/// Incidence data indexed for the refinement checks.
struct Incidence<'a> {
    s: &'a Structure,
    is_e: Vec<bool>,
    /// `links[x]`: set of `(i, other)` with `in_i(x, other)` or `in_i(other, x)`.
    links: Vec<BTreeSet<(usize, usize)>>,
}

impl<'a> Incidence<'a> {
    fn new(inc: &'a IncidenceStructure) -> Self {
        let s = &inc.structure;
        let mut is_e = vec![false; s.len()];
        for &e in &inc.e_part {
            is_e[e] = true;
        }
        let mut links = vec![BTreeSet::new(); s.len()];
        for i in 0..inc.original.max_arity() {
            if let Some(r) = s.relation(&position_symbol(i)) {
                for t in r {
                    links[t[0]].insert((i, t[1]));
                    links[t[1]].insert((i, t[0]));
                }
            }
        }
        Incidence { s, is_e, links }
    }

    /// First element outside `block` (of the opposite sort) linked
    /// differently to `x` and `y`.
    fn distinguisher(&self, x: usize, y: usize, block: &BTreeSet<usize>) -> Option<usize> {
        let outside = |(_, o): &(usize, usize)| !block.contains(o);
        let lx: BTreeSet<_> = self.links[x].iter().copied().filter(outside).collect();
        let ly: BTreeSet<_> = self.links[y].iter().copied().filter(outside).collect();
        lx.symmetric_difference(&ly).map(|&(_, o)| o).min()
    }
}

impl PartitionRefinement {
    pub fn new(tree: TreeDomain, classes: Vec<Vec<BTreeSet<usize>>>) -> Result<Self> {
        if tree.len() != classes.len() || tree.is_empty() {
            return Err(Error::Structural(format!(
                "{} class lists for a tree with {} vertices",
                classes.len(),
                tree.len()
            )));
        }
        Ok(PartitionRefinement { tree, classes })
    }

    pub fn tree(&self) -> &TreeDomain {
        &self.tree
    }

    pub fn classes(&self, v: usize) -> &[BTreeSet<usize>] {
        &self.classes[v]
    }

    pub fn block(&self, v: usize) -> BTreeSet<usize> {
        self.classes[v].iter().flatten().copied().collect()
    }

    /// Maximal number of classes at a vertex.
    pub fn width(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn class_index(&self, v: usize) -> HashMap<usize, usize> {
        self.classes[v]
            .iter()
            .enumerate()
            .flat_map(|(c, cls)| cls.iter().map(move |&x| (x, c)))
            .collect()
    }

    pub fn violations(&self, inc: &IncidenceStructure) -> Vec<RefinementViolation> {
        use RefinementViolation::*;
        let data = Incidence::new(inc);
        let s = data.s;
        let name = |x: usize| s.element(x).to_string();
        let node = |v: usize| seq_string(self.tree.node(v));
        let mut out = Vec::new();
        let blocks: Vec<BTreeSet<usize>> = (0..self.tree.len()).map(|v| self.block(v)).collect();
        for v in 0..self.tree.len() {
            for &x in &blocks[v] {
                if x >= s.len() {
                    out.push(UnknownElement { node: node(v), index: x });
                }
            }
            let total: usize = self.classes[v].iter().map(BTreeSet::len).sum();
            if total != blocks[v].len() || self.classes[v].iter().any(BTreeSet::is_empty) {
                out.push(NotPartition { node: node(v) });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let missing: Vec<String> = (0..s.len()).filter(|x| !blocks[0].contains(x)).map(name).collect();
        if !missing.is_empty() {
            out.push(RootIncomplete { missing });
        }
        let index: Vec<HashMap<usize, usize>> = (0..self.tree.len()).map(|v| self.class_index(v)).collect();
        for u in 0..self.tree.len() {
            let kids = self.tree.children(u);
            if kids.is_empty() {
                if blocks[u].len() != 1 {
                    out.push(LeafNotSingleton { node: node(u) });
                }
                continue;
            }
            let total: usize = kids.iter().map(|&c| blocks[c].len()).sum();
            let union: BTreeSet<usize> = kids.iter().flat_map(|&c| blocks[c].iter().copied()).collect();
            if total != union.len() || union != blocks[u] {
                out.push(ChildrenNotPartition { node: node(u) });
                continue;
            }
            for &c in kids {
                for cls in &self.classes[c] {
                    let first = *cls.first().expect("nonempty");
                    if let Some(&y) = cls.iter().find(|&&y| index[u][&y] != index[u][&first]) {
                        out.push(NotCoarsening {
                            node: node(u),
                            child: node(c),
                            x: name(first),
                            y: name(y),
                        });
                    }
                }
            }
            let child_of: HashMap<usize, usize> = kids
                .iter()
                .flat_map(|&c| blocks[c].iter().map(move |&x| (x, c)))
                .collect();
            for cls in &self.classes[u] {
                let members: Vec<usize> = cls.iter().copied().collect();
                for (i, &x) in members.iter().enumerate() {
                    for &y in &members[i + 1..] {
                        if data.is_e[x] != data.is_e[y] {
                            out.push(MixedClass {
                                node: node(u),
                                x: name(x),
                                y: name(y),
                            });
                            continue;
                        }
                        let mut outside = blocks[child_of[&x]].clone();
                        outside.extend(&blocks[child_of[&y]]);
                        if let Some(w) = data.distinguisher(x, y, &outside) {
                            out.push(External {
                                node: node(u),
                                x: name(x),
                                y: name(y),
                                witness: name(w),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self, inc: &IncidenceStructure) -> bool {
        self.violations(inc).is_empty()
    }

    /// The tree decomposition `U_u = B_u ∪ C_u ∪ D_u` of the original
    /// structure over the same tree. Elements of A in no tuple are placed in
    /// their own leaf's bag.
    pub fn to_tree_decomposition(&self, inc: &IncidenceStructure) -> Result<(Structure, TreeDecomposition)> {
        if let Some(v) = self.violations(inc).first() {
            return Err(Error::Structural(format!("invalid partition refinement: {v}")));
        }
        let original = crate::incidence::from_incidence(&inc.structure, &inc.original)?;
        let s = &inc.structure;
        let t = &self.tree;
        let mut leaf = vec![usize::MAX; s.len()];
        for v in t.leaves() {
            let x = *self.classes[v][0].first().expect("singleton leaf");
            leaf[x] = v;
        }
        let to_orig = |x: usize| original.index_of(s.element(x)).expect("A-element survives decoding");
        // incidences (a, e): a ∈ A linked to a tuple element e
        let mut pairs = BTreeSet::new();
        for i in 0..inc.original.max_arity() {
            if let Some(r) = s.relation(&position_symbol(i)) {
                pairs.extend(r.iter().map(|t| (t[0], t[1])));
            }
        }
        let mut bags = vec![BTreeSet::new(); t.len()];
        for u in 0..t.len() {
            for &(a, e) in &pairs {
                let (la, le) = (leaf[a], leaf[e]);
                let inside_a = t.le(u, la);
                let inside_e = t.le(u, le);
                let b = inside_a && !inside_e;
                let c = !inside_a && inside_e;
                let d = t.infimum(la, le) == u;
                if b || c || d {
                    bags[u].insert(to_orig(a));
                }
            }
        }
        for &a in &inc.a_part {
            if !pairs.iter().any(|&(x, _)| x == a) {
                bags[leaf[a]].insert(to_orig(a));
            }
        }
        let d = TreeDecomposition::new(t.clone(), bags)?;
        Ok((original, d))
    }

    pub fn to_json(&self, inc: &IncidenceStructure) -> RefinementJson {
        let s = &inc.structure;
        let tree = self.tree.to_strings();
        let classes = tree
            .iter()
            .zip(&self.classes)
            .map(|(k, cls)| {
                let named = cls
                    .iter()
                    .map(|c| c.iter().map(|&x| s.element(x).to_string()).collect())
                    .collect();
                (k.clone(), named)
            })
            .collect();
        RefinementJson { tree, classes }
    }

    pub fn from_json(json: &RefinementJson, inc: &IncidenceStructure) -> Result<PartitionRefinement> {
        let s = &inc.structure;
        let tree = TreeDomain::from_strings(&json.tree)?;
        let keys = tree.to_strings();
        let mut classes = vec![Vec::new(); tree.len()];
        for (key, cls) in &json.classes {
            let v = keys
                .iter()
                .position(|k| k == key)
                .ok_or_else(|| Error::Format(format!("classes for unknown tree vertex {key:?}")))?;
            for c in cls {
                let set = c
                    .iter()
                    .map(|n| s.index_of(n).ok_or_else(|| Error::Format(format!("unknown element {n}"))))
                    .collect::<Result<BTreeSet<usize>>>()?;
                classes[v].push(set);
            }
        }
        PartitionRefinement::new(tree, classes)
    }
}

/// A random valid refinement: balanced binary splits of a shuffled domain;
/// two elements are equivalent at u iff they share sort and child block and
/// have the same links to everything outside that block.
pub fn random_refinement(r: &mut Rng64, inc: &IncidenceStructure) -> PartitionRefinement {
    let data = Incidence::new(inc);
    let mut order: Vec<usize> = (0..inc.structure.len()).collect();
    order.shuffle(r);
    let mut parents = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn grow(items: &[usize], parent: Option<usize>, parents: &mut Vec<Option<usize>>, blocks: &mut Vec<Vec<usize>>) {
        let me = parents.len();
        parents.push(parent);
        blocks.push(items.to_vec());
        if items.len() > 1 {
            let mid = items.len() / 2;
            grow(&items[..mid], Some(me), parents, blocks);
            grow(&items[mid..], Some(me), parents, blocks);
        }
    }
    if order.is_empty() {
        let tree = TreeDomain::chain(1);
        return PartitionRefinement::new(tree, vec![Vec::new()]).expect("root");
    }
    grow(&order, None, &mut parents, &mut blocks);
    let (tree, map) = TreeDomain::from_parents(&parents).expect("split tree");
    let mut inverse = vec![0; tree.len()];
    for (i, &v) in map.iter().enumerate() {
        inverse[v] = i;
    }
    let mut classes = vec![Vec::new(); tree.len()];
    for (i, items) in blocks.iter().enumerate() {
        let v = map[i];
        if tree.is_leaf(v) {
            classes[v] = vec![items.iter().copied().collect()];
            continue;
        }
        let mut groups: BTreeMap<(usize, bool, Vec<(usize, usize)>), BTreeSet<usize>> = BTreeMap::new();
        for &c in tree.children(v) {
                let child_items: BTreeSet<usize> = blocks[inverse[c]].iter().copied().collect();
            for &x in &child_items {
                let ext: Vec<(usize, usize)> = data.links[x]
                    .iter()
                    .copied()
                    .filter(|(_, o)| !child_items.contains(o))
                    .collect();
                groups.entry((c, data.is_e[x], ext)).or_default().insert(x);
            }
        }
        classes[v] = groups.into_values().collect();
    }
    PartitionRefinement::new(tree, classes).expect("class list per vertex")
}

/// The refinement of a leaves-only basic scheme applied to an order tree:
/// `W_u` are the leaves below u, and `x ≈_u y` iff x, y have the same sort and
/// the rank-h types of (T_v, x) and (T_w, y) agree, v and w being the children
/// of u above x and y. Returns the produced incidence structure as well.
pub fn refinement_from_interpretation(
    t: &Transduction,
    tree: &ColouredTree,
    original: &Signature,
    h: Option<usize>,
    types: TypeOptions,
) -> Result<(IncidenceStructure, PartitionRefinement)> {
    if t.k != 1 || t.p != 0 {
        return Err(Error::Argument("refinements need a basic scheme (k = 1, no parameters)".into()));
    }
    if tree.mode != TreeMode::Order {
        return Err(Error::Argument("refinements are read off order trees".into()));
    }
    let input = tree.to_structure();
    let out = apply_basic(&t.scheme, &input, EvalOptions::default())?
        .ok_or_else(|| Error::Argument("the scheme's domain condition fails on this tree".into()))?;
    let dom = &tree.domain;
    let names = dom.element_names();
    let mut node_of = vec![0; out.len()];
    for (x, name) in out.domain().iter().enumerate() {
        let v = names.iter().position(|n| n == name).expect("output element comes from the tree");
        if !dom.is_leaf(v) {
            return Err(Error::Argument(format!("output element {name} is not a leaf")));
        }
        node_of[x] = v;
    }
    let inc = split(out, original.clone());
    let mut is_e = vec![false; inc.structure.len()];
    for &e in &inc.e_part {
        is_e[e] = true;
    }
    let h = h.unwrap_or_else(|| {
        let sch = &t.scheme;
        sch.phis.iter().map(|(_, f)| f.rank()).chain([sch.delta.1.rank()]).max().unwrap_or(0)
    });
    let q = t.scheme.phis.iter().map(|(_, f)| f.max_modulus()).max().unwrap_or(1).max(1);
    let sig = ColouredTree::signature(TreeMode::Order, tree.colours.len());
    let mut ctx = TypeContext::new(&sig, q).with_options(types);
    let mut subtree_cache: HashMap<usize, Structure> = HashMap::new();
    let mut classes = vec![Vec::new(); dom.len()];
    for u in 0..dom.len() {
        let leaves: Vec<usize> = (0..inc.structure.len()).filter(|&x| dom.le(u, node_of[x])).collect();
        if dom.is_leaf(u) {
            classes[u] = leaves.iter().map(|&x| BTreeSet::from([x])).collect();
            continue;
        }
        let mut groups: BTreeMap<(bool, u32), BTreeSet<usize>> = BTreeMap::new();
        for &x in &leaves {
            let leaf = node_of[x];
            let child = *dom
                .children(u)
                .iter()
                .find(|&&c| dom.le(c, leaf))
                .expect("leaf below a child");
            let sub = subtree_cache
                .entry(child)
                .or_insert_with(|| subtree(tree, child).to_structure());
            // subtree element indices follow the relative sequences
            let local = dom.descendants(child).iter().position(|&w| w == leaf).expect("in subtree");
            let id = ctx.type_id(sub, &[1u64 << local], h)?;
            groups.entry((is_e[x], id)).or_default().insert(x);
        }
        classes[u] = groups.into_values().collect();
    }
    let refinement = PartitionRefinement::new(dom.clone(), classes)?;
    Ok((inc, refinement))
}

fn subtree(t: &ColouredTree, v: usize) -> ColouredTree {
    let desc = t.domain.descendants(v);
    let pos: HashMap<usize, usize> = desc.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    ColouredTree {
        domain: t.domain.subtree(v),
        mode: t.mode,
        colours: t
            .colours
            .iter()
            .map(|c| c.iter().filter_map(|w| pos.get(w).copied()).collect())
            .collect(),
    }
}

/// The running example `R = {(a,b,c), (a,b,d), (a,b,e)}` with the
/// refinement whose root classes are {a} | {b} | {c,d,e} | {x,y,z}: the root
/// has children {a}, {b}, {c,x}, {d,y}, {e,z}; width 4.
pub fn example_refinement() -> (Structure, IncidenceStructure, PartitionRefinement) {
    let sig = Signature::new([("R", 3)]).expect("signature");
    let mut s = Structure::new(sig, ["a", "b", "c", "d", "e"]).expect("domain");
    for x in ["c", "d", "e"] {
        s.add_tuple("R", &["a", "b", x]).expect("tuple");
    }
    let inc = crate::incidence::to_incidence(&s);
    let id = |n: &str| inc.structure.index_of(n).expect("element");
    let tup = |x: &str| id(&crate::incidence::tuple_element("R", &["a", "b", x]));
    let set = |xs: &[usize]| xs.iter().copied().collect::<BTreeSet<usize>>();
    let tree = TreeDomain::from_strings(&["", "0", "1", "2", "20", "21", "3", "30", "31", "4", "40", "41"])
        .expect("tree");
    let mut classes = vec![
        vec![
            set(&[id("a")]),
            set(&[id("b")]),
            set(&[id("c"), id("d"), id("e")]),
            set(&[tup("c"), tup("d"), tup("e")]),
        ],
        vec![set(&[id("a")])],
        vec![set(&[id("b")])],
    ];
    for x in ["c", "d", "e"] {
        classes.push(vec![set(&[id(x)]), set(&[tup(x)])]);
        classes.push(vec![set(&[id(x)])]);
        classes.push(vec![set(&[tup(x)])]);
    }
    let pr = PartitionRefinement::new(tree, classes).expect("example");
    (s, inc, pr)
}
