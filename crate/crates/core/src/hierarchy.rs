//! The counting function B(n,k,c), finite-sample evidence for the level of a
//! class in the hierarchy T_0 ⊏ T_1 ⊏ … ⊏ P ⊏ T_ω ⊏ G, and checking
//! `C ⊆ τ(K)` on samples.
//!
//! B follows the summation `2^{cn} + Σ_{m=2}^{k} 2^{c·|[m]^{<n}|}`: the
//! m = 1 tree is the chain with n vertices and m = 0 is left out. Counting
//! functions `m^{<n} → P([c])` literally would add the m = 0 term.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::decomposition::{exact_width, WidthMode};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso::{canonical_form, CanonicalForm};
use crate::minor::all_minors;
use crate::structure::Structure;
use crate::tree::{ColouredTree, TreeDomain, TreeMode};

/// Largest exponent (in bits) [`count_b`] will materialise.
pub const MAX_B_BITS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountB {
    pub value: BigUint,
    /// `2^{ck^{n−1}}` and `k·2^{2ck^{n−1}}`, present for n ≥ 1, k ≥ 2.
    pub bounds: Option<(BigUint, BigUint)>,
}

impl CountB {
    pub fn bounds_hold(&self) -> bool {
        self.bounds
            .as_ref()
            .map_or(true, |(lo, hi)| lo <= &self.value && &self.value <= hi)
    }
}

/// `|[m]^{<n}| = Σ_{i<n} m^i`.
pub fn tree_size(m: usize, n: usize) -> Result<usize> {
    let mut total: usize = 0;
    let mut power: usize = 1;
    for _ in 0..n {
        total = total.checked_add(power).ok_or_else(|| Error::budget("tree size", usize::MAX, usize::MAX))?;
        power = power.saturating_mul(m);
    }
    Ok(total)
}

fn pow2(bits: usize) -> Result<BigUint> {
    if bits > MAX_B_BITS {
        return Err(Error::budget("bits of B(n,k,c)", MAX_B_BITS, bits));
    }
    Ok(BigUint::one() << bits)
}

pub fn count_b(n: usize, k: usize, c: usize) -> Result<CountB> {
    let mut value = pow2(c.saturating_mul(n))?;
    for m in 2..=k {
        value += pow2(c.saturating_mul(tree_size(m, n)?))?;
    }
    let bounds = if n >= 1 && k >= 2 {
        let e = c.saturating_mul(k.checked_pow(n as u32 - 1).unwrap_or(usize::MAX));
        Some((pow2(e)?, pow2(e.saturating_mul(2))? * BigUint::from(k)))
    } else {
        None
    };
    Ok(CountB { value, bounds })
}

/// A level of the hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    /// `T_n = {m^{<n} : m ∈ ℕ}`.
    T(usize),
    /// Bounded longest paths, but no tested `twd_n` levels off.
    DeeperThan(usize),
    Paths,
    Trees,
    Grids,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::T(n) => write!(f, "T_{n}"),
            Level::DeeperThan(n) => write!(f, "T_n for some n > {n}"),
            Level::Paths => write!(f, "P"),
            Level::Trees => write!(f, "T_omega"),
            Level::Grids => write!(f, "G"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Exact-width vertex budget per sample.
    pub budget: usize,
    /// `twd_n` is computed for `n = 1..=max_depth`.
    pub max_depth: usize,
    /// Vertex budget for the grid-minor search.
    pub minor_budget: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: 16,
            max_depth: 4,
            minor_budget: 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEvidence {
    pub size: usize,
    pub twd: isize,
    pub pwd: isize,
    /// `twd_1, …, twd_N`.
    pub twd_n: Vec<isize>,
    pub longest_path: usize,
    /// For successor trees: the largest m with `m^{<h}` embedded, for h = 2..=N.
    pub complete_trees: Option<Vec<usize>>,
    /// Largest k with the k×k grid as a minor, when decidable within budget.
    pub grid_minor: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trend {
    pub measure: String,
    pub values: Vec<isize>,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceReport {
    /// Per input sample, in input order; `Err` holds the reason it was skipped.
    pub samples: Vec<std::result::Result<SampleEvidence, String>>,
    pub trends: Vec<Trend>,
    pub verdict: Level,
    pub note: String,
}

impl EvidenceReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let n = self.samples.iter().flatten().map(|e| e.twd_n.len()).max().unwrap_or(0);
        let mut header = vec!["#".to_string(), "size".into(), "twd".into(), "pwd".into()];
        header.extend((1..=n).map(|i| format!("twd_{i}")));
        header.extend(["path".to_string(), "grid".into()]);
        out.push_str(&header.join("\t"));
        out.push('\n');
        for (i, s) in self.samples.iter().enumerate() {
            match s {
                Ok(e) => {
                    let mut row = vec![i.to_string(), e.size.to_string(), e.twd.to_string(), e.pwd.to_string()];
                    row.extend(e.twd_n.iter().map(isize::to_string));
                    row.push(e.longest_path.to_string());
                    row.push(e.grid_minor.map_or("?".into(), |k| k.to_string()));
                    out.push_str(&row.join("\t"));
                }
                Err(why) => out.push_str(&format!("{i}\tskipped: {why}")),
            }
            out.push('\n');
        }
        for t in &self.trends {
            let state = if t.bounded { "bounded" } else { "growing" };
            out.push_str(&format!("{}: {state} {:?}\n", t.measure, t.values));
        }
        out.push_str(&format!("verdict: consistent with {} ({})\n", self.verdict, self.note));
        out
    }
}

/// A measure counts as bounded when it is constant on the last half of the
/// samples (at least two of them), ordered by size.
fn tail_bounded(values: &[isize]) -> bool {
    let tail = values.len().div_ceil(2).max(2).min(values.len());
    values[values.len() - tail..].windows(2).all(|w| w[0] == w[1])
}

fn grid_minor(g: &Graph, twd: isize, budget: usize) -> Option<usize> {
    if g.vertex_count() == 0 {
        return Some(0);
    }
    // the k×k grid has tree-width k, so small tree-width settles it
    if twd < 2 {
        return Some(1);
    }
    let minors: HashSet<CanonicalForm> = all_minors(g, budget).ok()?.iter().map(|m| canonical_form(m.structure())).collect();
    let mut best = 1;
    for k in 2..=twd as usize {
        if minors.contains(&canonical_form(Graph::grid(k, k).structure())) {
            best = k;
        } else {
            break;
        }
    }
    Some(best)
}

pub fn sample_evidence(s: &Structure, opts: &ClassifyOptions) -> Result<SampleEvidence> {
    let g = s.gaifman();
    let twd = exact_width(s, WidthMode::Tree, opts.budget)?.0;
    let pwd = exact_width(s, WidthMode::Path, opts.budget)?.0;
    let twd_n = (1..=opts.max_depth)
        .map(|n| exact_width(s, WidthMode::Depth(n), opts.budget).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let longest_path = g.longest_path_vertices(opts.budget)?;
    let complete_trees = ColouredTree::from_structure(s, TreeMode::Successor).ok().map(|t| {
        (2..=opts.max_depth)
            .map(|h| {
                (1..=s.len())
                    .take_while(|&m| {
                        TreeDomain::complete(m, h)
                            .embed_into(&t.domain, opts.budget.max(s.len()))
                            .ok()
                            .flatten()
                            .is_some()
                    })
                    .last()
                    .unwrap_or(0)
            })
            .collect()
    });
    Ok(SampleEvidence {
        size: s.len(),
        twd,
        pwd,
        twd_n,
        longest_path,
        complete_trees,
        grid_minor: grid_minor(&g, twd, opts.minor_budget),
    })
}

/// Names the least level consistent with the sample. Bounded `twd_n` for
/// some n is tested through bounded longest paths (a class has bounded
/// n-depth tree-width for some n iff it excludes a path); the n reported is
/// then the least tested one whose `twd_n` is bounded.
pub fn classify_family(samples: &[Structure], opts: &ClassifyOptions) -> EvidenceReport {
    let evidence: Vec<std::result::Result<SampleEvidence, String>> = samples
        .iter()
        .map(|s| sample_evidence(s, opts).map_err(|e| e.to_string()))
        .collect();
    classify_evidence(evidence, opts.max_depth)
}

pub fn classify_evidence(evidence: Vec<std::result::Result<SampleEvidence, String>>, max_depth: usize) -> EvidenceReport {
    let mut ok: Vec<&SampleEvidence> = evidence.iter().flatten().collect();
    ok.sort_by_key(|e| e.size);
    let trend = |measure: String, values: Vec<isize>| Trend {
        bounded: tail_bounded(&values),
        measure,
        values,
    };
    let mut trends = vec![
        trend("longest path".into(), ok.iter().map(|e| e.longest_path as isize).collect()),
        trend("pwd".into(), ok.iter().map(|e| e.pwd).collect()),
        trend("twd".into(), ok.iter().map(|e| e.twd).collect()),
    ];
    for n in 1..=max_depth {
        trends.push(trend(format!("twd_{n}"), ok.iter().map(|e| e.twd_n.get(n - 1).copied().unwrap_or(0)).collect()));
    }
    let bounded = |name: &str| trends.iter().find(|t| t.measure == name).is_some_and(|t| t.bounded);
    let verdict = if ok.is_empty() || ok.iter().all(|e| e.size == 0) {
        Level::T(0)
    } else if bounded("longest path") {
        (1..=max_depth)
            .find(|n| bounded(&format!("twd_{n}")))
            .map_or(Level::DeeperThan(max_depth), Level::T)
    } else if bounded("pwd") {
        Level::Paths
    } else if bounded("twd") {
        Level::Trees
    } else {
        Level::Grids
    };
    let skipped = evidence.iter().filter(|e| e.is_err()).count();
    let note = format!(
        "finite-sample evidence from {} samples{}, not a proof",
        ok.len(),
        if skipped > 0 { format!(" ({skipped} skipped)") } else { String::new() }
    );
    EvidenceReport {
        samples: evidence,
        trends,
        verdict,
        note,
    }
}

/// For each `C`-sample, the (K-sample, image) pair it matches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub holds: bool,
    pub matching: Vec<Option<(usize, usize)>>,
}

/// Whether every `C`-sample is isomorphic to some image of some `K`-sample.
pub fn verify_reduction<F>(c: &[Structure], images: F, k: &[Structure]) -> Result<ReductionCheck>
where
    F: Fn(&Structure) -> Result<Vec<Structure>>,
{
    let mut index: BTreeMap<CanonicalForm, (usize, usize)> = BTreeMap::new();
    for (i, s) in k.iter().enumerate() {
        for (j, b) in images(s)?.iter().enumerate() {
            index.entry(canonical_form(b)).or_insert((i, j));
        }
    }
    let matching: Vec<Option<(usize, usize)>> = c.iter().map(|s| index.get(&canonical_form(s)).copied()).collect();
    Ok(ReductionCheck {
        holds: matching.iter().all(Option::is_some),
        matching,
    })
}

/// Samples of the canonical classes, for experiments and tests.
pub mod families {
    use super::*;

    /// Successor structure of a tree domain.
    pub fn successor_tree(t: TreeDomain) -> Structure {
        ColouredTree::plain(t, TreeMode::Successor).to_structure()
    }

    /// `m^{<n}` for the given m.
    pub fn complete_trees(n: usize, ms: impl IntoIterator<Item = usize>) -> Vec<Structure> {
        ms.into_iter().map(|m| successor_tree(TreeDomain::complete(m, n))).collect()
    }

    pub fn paths(lengths: impl IntoIterator<Item = usize>) -> Vec<Structure> {
        lengths.into_iter().map(|l| Graph::path(l).into_structure()).collect()
    }

    pub fn grids(sides: impl IntoIterator<Item = usize>) -> Vec<Structure> {
        sides.into_iter().map(|k| Graph::grid(k, k).into_structure()).collect()
    }

    pub fn binary_trees(heights: impl IntoIterator<Item = usize>) -> Vec<Structure> {
        complete_trees_by_height(2, heights)
    }

    fn complete_trees_by_height(m: usize, heights: impl IntoIterator<Item = usize>) -> Vec<Structure> {
        heights.into_iter().map(|h| successor_tree(TreeDomain::complete(m, h))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;
    use crate::transduction::{library, ApplyOptions, Transduction};

    /// Counts functions `[m]^{<n} → P([c])` by walking every colouring.
    fn enumerate_b(n: usize, k: usize, c: usize) -> u64 {
        let mut total = 0u64;
        for m in 1..=k {
            let size = TreeDomain::complete(m, n).len();
            let colours = 1u64 << c;
            let mut count = 0u64;
            let mut f = vec![0u64; size];
            loop {
                count += 1;
                let Some(i) = f.iter().position(|&x| x + 1 < colours) else {
                    break;
                };
                f[i] += 1;
                f[..i].iter_mut().for_each(|x| *x = 0);
            }
            total += count;
        }
        total
    }

    #[test]
    fn small_values() {
        let b = count_b(2, 2, 1).unwrap();
        assert_eq!(b.value, BigUint::from(12u32));
        assert_eq!(b.bounds, Some((BigUint::from(4u32), BigUint::from(32u32))));
        assert!(b.bounds_hold());
        assert_eq!(count_b(1, 3, 2).unwrap().value, BigUint::from(12u32));
        for n in 0..4 {
            for c in 0..3 {
                assert_eq!(count_b(n, 1, c).unwrap().value, BigUint::one() << (c * n));
            }
        }
        assert!(count_b(30, 5, 3).is_err());
    }

    #[test]
    fn matches_enumeration() {
        for (n, k, c) in [(2, 2, 1), (1, 3, 2), (2, 3, 1), (3, 2, 1), (2, 2, 2), (1, 4, 1)] {
            assert_eq!(count_b(n, k, c).unwrap().value, BigUint::from(enumerate_b(n, k, c)), "{n} {k} {c}");
        }
    }

    #[test]
    fn bounds_on_grid_of_parameters() {
        for n in 1..=4 {
            for k in 2..=5 {
                for c in 1..=3 {
                    assert!(count_b(n, k, c).unwrap().bounds_hold(), "{n} {k} {c}");
                }
            }
        }
    }

    #[test]
    fn paths_are_path_consistent() {
        let r = classify_family(&paths(1..=6), &ClassifyOptions::default());
        let e: Vec<&SampleEvidence> = r.samples.iter().flatten().collect();
        assert!(e.iter().all(|s| s.pwd == 1));
        let twd2: Vec<isize> = e.iter().map(|s| s.twd_n[1]).collect();
        assert!(twd2.windows(2).all(|w| w[0] <= w[1]) && twd2[0] < twd2[5], "{twd2:?}");
        assert_eq!(r.verdict, Level::Paths);
    }

    #[test]
    fn grids_and_stars() {
        let r = classify_family(&grids(2..=3), &ClassifyOptions::default());
        let twd: Vec<isize> = r.samples.iter().flatten().map(|e| e.twd).collect();
        assert_eq!(twd, vec![2, 3]);
        assert_eq!(r.verdict, Level::Grids);
        assert_eq!(r.samples[1].as_ref().unwrap().grid_minor, Some(3));
        let stars = classify_family(&complete_trees(2, 1..=5), &ClassifyOptions::default());
        assert!(stars.samples.iter().flatten().all(|e| e.twd_n[1] == 1));
        assert_eq!(stars.verdict, Level::T(2));
        assert_eq!(stars.samples[4].as_ref().unwrap().complete_trees.as_ref().unwrap()[0], 5);
        assert!(stars.to_table().contains("T_2"));
    }

    #[test]
    fn skipped_samples_are_reported() {
        let big = Graph::path(30).into_structure();
        let mut samples = paths(1..=4);
        samples.push(big);
        let r = classify_family(&samples, &ClassifyOptions::default());
        assert!(r.samples[4].is_err());
        assert!(r.note.contains("1 skipped"));
    }

    #[test]
    fn reductions_on_samples() {
        let opts = ApplyOptions::default();
        // trees of height ≤ 2 with at most 4 vertices from paths
        let tw = crate::encodings::tree_word_transduction(2);
        let c: Vec<Structure> = (1..=4)
            .flat_map(crate::tree::all_trees)
            .filter(|t| t.height() <= 2)
            .map(successor_tree)
            .collect();
        let k = paths(0..=3);
        let check = verify_reduction(&c, |s| tw.apply(s, &opts), &k).unwrap();
        assert!(check.holds, "{check:?}");
        // identity cannot produce a triangle from a path
        let id = Transduction::identity(&crate::graph::edge_signature());
        let k3 = vec![Graph::complete(3).into_structure()];
        let no = verify_reduction(&k3, |s| id.apply(s, &opts), &paths([2])).unwrap();
        assert!(!no.holds && no.matching == vec![None]);
        // minors of P4 through the parameter sweep
        let mins: Vec<Structure> = all_minors(&Graph::path(3), 10).unwrap().into_iter().map(Graph::into_structure).collect();
        let sweep = |s: &Structure| -> Result<Vec<Structure>> {
            let g = Graph::from_structure(s, false)?;
            Ok(crate::encodings::minor_sweep(&g, 10)?.into_iter().map(Graph::into_structure).collect())
        };
        assert!(verify_reduction(&mins, sweep, &paths([3])).unwrap().holds);
    }

    #[test]
    fn trees_and_deeper_levels() {
        let opts = ClassifyOptions::default();
        let bin = classify_family(&binary_trees(1..=4), &opts);
        let pwd: Vec<isize> = bin.samples.iter().flatten().map(|e| e.pwd).collect();
        assert_eq!(pwd, vec![0, 1, 1, 2]);
        assert_eq!(bin.verdict, Level::Trees);
        let t3 = classify_family(&complete_trees(3, 1..=3), &opts);
        assert!(t3.samples.iter().flatten().all(|e| e.twd_n[2] == e.size.min(2) as isize - 1));
        assert_eq!(t3.verdict, Level::T(3));
    }

    #[test]
    fn reductions_compose() {
        let opts = ApplyOptions::default();
        let dedupe = |v: Vec<Structure>| -> Vec<Structure> {
            let mut seen = HashSet::new();
            v.into_iter().filter(|s| seen.insert(canonical_form(s))).collect()
        };
        let (sigma, tau) = (library::expander(), library::complement());
        let l = paths(0..=2);
        let k = dedupe(l.iter().flat_map(|s| sigma.apply(s, &opts).unwrap()).collect());
        let c = dedupe(k.iter().flat_map(|s| tau.apply(s, &opts).unwrap()).collect());
        assert!(verify_reduction(&k, |s| sigma.apply(s, &opts), &l).unwrap().holds);
        assert!(verify_reduction(&c, |s| tau.apply(s, &opts), &k).unwrap().holds);
        let both = crate::transduction::compose(&tau, &sigma).unwrap();
        assert!(verify_reduction(&c, |s| both.apply(s, &opts), &l).unwrap().holds);
    }
}
