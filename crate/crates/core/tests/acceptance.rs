//! One PASS/FAIL line per acceptance criterion, each with its time limit.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use tdhier::decomposition::{
    dfs_decomposition, exhaustive_width, extract_tree, graph_width, level_order, levels_of, random_decomposition,
    random_decomposition_on, reduce_height, WidthMode,
};
use tdhier::encodings::{
    decomposition_encode, grid_decode, grid_encode, minor_sweep, tree_word_decode, tree_word_encode, GridCode,
};
use tdhier::graph::edge_signature;
use tdhier::hierarchy::{classify_family, count_b, families, ClassifyOptions, Level};
use tdhier::iso::canonical_form;
use tdhier::logic::{holds, TypeContext, TypeOptions};
use tdhier::minor::all_minors;
use tdhier::partition::{example_refinement, random_refinement};
use tdhier::random::{random_connected_graph, random_graph, random_structure, random_tree_of_height, rng};
use tdhier::transduction::{backwards, compose, library, ApplyOptions};
use tdhier::tree::all_trees;
use tdhier::{from_incidence, isomorphic, to_incidence, Formula, Graph, Structure, TreeDomain};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every structure over one binary relation with at most `n` elements, one
/// per isomorphism class.
fn binary_corpus(n: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for size in 0..=n {
        let names: Vec<String> = (0..size).map(|i| format!("v{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..size).flat_map(|u| (0..size).map(move |v| (u, v))).collect();
        let mut seen = HashSet::new();
        for mask in 0u64..1 << pairs.len() {
            let rel: BTreeSet<Vec<usize>> = (0..pairs.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| vec![pairs[i].0, pairs[i].1])
                .collect();
            let s = Structure::from_named(edge_signature(), names.clone(), vec![rel]).unwrap();
            if seen.insert(canonical_form(&s)) {
                out.push(s);
            }
        }
    }
    out
}

fn graph_catalogue(n: usize) -> Vec<Graph> {
    (0..=n).flat_map(Graph::catalogue).collect()
}

fn random_corpus(seed: u64, count: usize) -> Vec<Structure> {
    let mut r = rng(seed);
    (0..count).map(|_| random_structure(&mut r, 8, 3)).collect()
}

fn sparsity() -> Outcome {
    let (example, _, _) = example_refinement();
    let mut corpus = vec![example];
    corpus.extend(random_corpus(1, 500));
    for s in &corpus {
        let inc = to_incidence(s);
        let sparse = inc.structure.is_k_sparse(1);
        ensure(sparse, || format!("incidence of {:?} is not 1-sparse", s.domain()))?;
    }
    Ok(format!("{} structures", corpus.len()))
}

fn incidence_roundtrip() -> Outcome {
    let (example, _, _) = example_refinement();
    let mut corpus = vec![example];
    corpus.extend(random_corpus(1, 500));
    for s in &corpus {
        let back = from_incidence(&to_incidence(s).structure, s.signature()).map_err(|e| e.to_string())?;
        ensure(isomorphic(&back, s), || format!("roundtrip changed {:?}", s.domain()))?;
    }
    Ok(format!("{} structures", corpus.len()))
}

const SENTENCES: [&str; 20] = [
    "(existsF x (existsF y (rel edg x y)))",
    "(existsF x (rel edg x x))",
    "(forallF x (existsF y (rel edg x y)))",
    "(existsF x (forallF y (or (rel edg x y) (sub x y))))",
    "(forallF x (forallF y (or (not (rel edg x y)) (rel edg y x))))",
    "(existsF x (true))",
    "(forallF x (false))",
    "(exists X (card X 1 2))",
    "(forall X (card X 0 2))",
    "(exists X (and (forallF x (sub x X)) (card X 0 2)))",
    "(forall X (or (not (forallF x (sub x X))) (card X 1 2)))",
    "(existsF x (existsF y (and (rel edg x y) (not (sub x y)))))",
    "(forallF x (existsF y (or (rel edg x y) (rel edg y x))))",
    "(existsF x (forallF y (not (rel edg y x))))",
    "(forallF x (forallF y (or (sub x y) (rel edg x y))))",
    "(not (existsF x (existsF y (and (rel edg x y) (rel edg y x) (not (sub x y))))))",
    "(exists X (and (not (empty X)) (forallF x (or (not (sub x X)) (rel edg x x)))))",
    "(exists X (and (card X 0 2) (not (empty X)) (forallF x (or (sub x X) (rel edg x x)))))",
    "(or (existsF x (rel edg x x)) (forallF x (forallF y (sub x y))))",
    "(and (existsF x (true)) (not (existsF x (existsF y (rel edg x y)))))",
];

fn comorphism() -> Outcome {
    let corpus = binary_corpus(4);
    let opts = ApplyOptions::default();
    let sentences: Vec<Formula> = SENTENCES.iter().map(|s| s.parse().unwrap()).collect();
    for phi in &sentences {
        ensure(phi.rank() <= 2, || format!("{phi} has rank {}", phi.rank()))?;
    }
    let mut checks = 0;
    for (name, t) in library::named() {
        let backs: Vec<Formula> = sentences.iter().map(|phi| backwards(&t, phi).unwrap()).collect();
        let counts: Vec<usize> = corpus
            .par_iter()
            .map(|a| -> Result<usize, String> {
                let outs = t.apply(a, &opts).map_err(|e| e.to_string())?;
                for (phi, back) in sentences.iter().zip(&backs) {
                    let lhs = holds(a, back).map_err(|e| e.to_string())?;
                    let rhs = outs.iter().any(|b| holds(b, phi).unwrap());
                    ensure(lhs == rhs, || format!("{name}: {phi} on {:?}", a.relation_at(0)))?;
                }
                Ok(sentences.len())
            })
            .collect::<Result<Vec<_>, String>>()?;
        checks += counts.iter().sum::<usize>();
    }
    Ok(format!("{checks} checks over {} structures", corpus.len()))
}

fn composition() -> Outcome {
    let corpus = binary_corpus(4);
    let opts = ApplyOptions::default();
    let mut pairs = 0;
    for (sn, s) in library::named() {
        for (tn, t) in library::named() {
            let st = compose(&s, &t).map_err(|e| e.to_string())?;
            corpus.par_iter().try_for_each(|a| {
                let composed = st.apply(a, &opts).unwrap();
                let mut staged = Vec::new();
                for b in t.apply(a, &opts).unwrap() {
                    staged.extend(s.apply(&b, &opts).unwrap());
                }
                // both sides name elements alike, so equal output sets settle it
                // without canonical forms
                let exact: HashSet<&Structure> = composed.iter().collect();
                if exact == staged.iter().collect::<HashSet<_>>() {
                    return Ok(());
                }
                let forms = |v: &[Structure]| v.iter().map(canonical_form).collect::<BTreeSet<_>>();
                ensure(forms(&composed) == forms(&staged), || format!("{sn} after {tn} on {:?}", a.relation_at(0)))
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} composites over {} structures", corpus.len()))
}

fn union_compositionality() -> Outcome {
    let all = binary_corpus(4);
    let mut r = rng(5);
    let mut corpus: Vec<Structure> = all[..12].to_vec();
    while corpus.len() < 30 {
        corpus.push(all[r.gen_range(12..all.len())].clone());
    }
    let opts = TypeOptions {
        max_domain: 8,
        max_rank: 2,
    };
    let mut pairs = 0;
    for m in 0..=2 {
        let mut ctx = TypeContext::new(&edge_signature(), 2).with_options(opts);
        let ids: Vec<u32> = corpus.iter().map(|s| ctx.type_id(s, &[], m).unwrap()).collect();
        let mut table: HashMap<(u32, u32), (u32, usize, usize)> = HashMap::new();
        for (i, a) in corpus.iter().enumerate() {
            for (j, b) in corpus.iter().enumerate() {
                let u = a.disjoint_union(b).map_err(|e| e.to_string())?;
                let t = ctx.type_id(&u, &[], m).map_err(|e| e.to_string())?;
                let (seen, i0, j0) = *table.entry((ids[i], ids[j])).or_insert((t, i, j));
                ensure(seen == t, || format!("rank {m}: pairs ({i0},{j0}) and ({i},{j}) disagree"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} unions at ranks 0..=2"))
}

fn width_oracles() -> Outcome {
    let graphs = graph_catalogue(7);
    let mut modes = vec![WidthMode::Tree, WidthMode::Path];
    modes.extend((1..=4).map(WidthMode::Depth));
    graphs.par_iter().try_for_each(|g| {
        for &mode in &modes {
            let (w, d) = graph_width(g, mode, 10).map_err(|e| e.to_string())?;
            let brute = exhaustive_width(g, mode, 9).map_err(|e| e.to_string())?;
            ensure(w == brute, || format!("{mode} of {:?}: {w} vs {brute}", g.edges()))?;
            ensure(d.is_valid(g.structure()) && d.width() == w, || format!("{mode} witness for {:?}", g.edges()))?;
            if let WidthMode::Depth(n) = mode {
                ensure(d.height() <= n, || format!("{mode} witness too high"))?;
            }
        }
        let (w1, _) = graph_width(g, WidthMode::Depth(1), 10).unwrap();
        ensure(w1 == g.vertex_count() as isize - 1, || "twd_1 is not |A|-1".into())
    })?;
    let w = |g: &Graph, m: WidthMode| graph_width(g, m, 10).unwrap().0;
    ensure(w(&Graph::complete(3), WidthMode::Tree) == 2, || "twd(K3) != 2".into())?;
    ensure(w(&Graph::path(3), WidthMode::Path) == 1, || "pwd(P4) != 1".into())?;
    ensure(w(&Graph::path(3), WidthMode::Depth(2)) == 1, || "twd_2(P4) != 1".into())?;
    Ok(format!("{} graphs x {} modes", graphs.len(), modes.len()))
}

fn width_inequalities() -> Outcome {
    let graphs = graph_catalogue(7);
    graphs.par_iter().try_for_each(|g| {
        let w = |m: WidthMode| graph_width(g, m, 10).unwrap().0;
        let twd = w(WidthMode::Tree);
        let pwd = w(WidthMode::Path);
        for n in 1..=4isize {
            let twd_n = w(WidthMode::Depth(n as usize));
            let twd_n1 = w(WidthMode::Depth(n as usize + 1));
            ensure(twd <= twd_n1 && twd_n1 <= twd_n, || format!("monotonicity at n={n} on {:?}", g.edges()))?;
            ensure(pwd < n * (twd_n + 1) || g.vertex_count() == 0, || format!("pwd bound at n={n} on {:?}", g.edges()))?;
        }
        Ok::<(), String>(())
    })?;
    Ok(format!("{} graphs, n = 1..=4", graphs.len()))
}

fn strictness() -> Outcome {
    let mut r = rng(8);
    for _ in 0..200 {
        let n = r.gen_range(1..=8);
        let g = random_graph(&mut r, n, 0.35);
        let s = g.structure();
        let d = random_decomposition(&mut r, s, 7);
        let f = d.strictify(s).map_err(|e| e.to_string())?;
        ensure(f.is_valid(s) && f.is_strict(s).unwrap(), || format!("strictify failed on {:?}", g.edges()))?;
        ensure(f.width() <= d.width() && f.height() <= d.height(), || "strictify grew the decomposition".into())?;
    }
    let mut recovered = 0;
    for i in 0..200 {
        let g = random_graph(&mut r, 1 + i % 8, 0.4);
        let s = g.structure();
        let tree = random_tree_of_height(&mut r, 1 + i % 7, 3);
        let d = random_decomposition_on(&mut r, s, tree).strictify(s).map_err(|e| e.to_string())?;
        let mu = d.mu(s).map_err(|e| e.to_string())?;
        let levels = levels_of(&d, s).map_err(|e| e.to_string())?;
        let order = level_order(s, &levels).map_err(|e| e.to_string())?;
        for a in 0..s.len() {
            for b in 0..s.len() {
                ensure(order.le(a, b) == d.tree().le(mu[a], mu[b]), || "level order differs from μ order".into())?;
            }
        }
        let e = extract_tree(s, &levels).map_err(|e| e.to_string())?;
        ensure(e.tree.shape() == d.tree().shape(), || "extracted tree differs".into())?;
        recovered += 1;
    }
    Ok(format!("200 strictified, {recovered} trees recovered"))
}

fn dfs_bounds() -> Outcome {
    let mut r = rng(13);
    for _ in 0..100 {
        let n = r.gen_range(1..=8);
        let g = random_connected_graph(&mut r, n, 0.3);
        let d = dfs_decomposition(&g);
        let l = g.longest_path_vertices(10).map_err(|e| e.to_string())?;
        ensure(d.is_valid(g.structure()), || "invalid DFS decomposition".into())?;
        ensure(d.height() <= l && d.width() <= l as isize - 1, || format!("bounds fail on {:?}", g.edges()))?;
        let (twd_l, _) = graph_width(&g, WidthMode::Depth(l), 10).map_err(|e| e.to_string())?;
        ensure(twd_l < l as isize, || "twd_L >= L".into())?;
    }
    Ok("100 graphs".into())
}

fn height_reduction() -> Outcome {
    let mut r = rng(21);
    let mut checked = 0;
    let mut refused = 0;
    for i in 0..400 {
        let g = random_graph(&mut r, 2 + i % 7, 0.4);
        let n = 1 + i % 3;
        let m = 2 + i % 2;
        let tree = random_tree_of_height(&mut r, 2 + i % 9, n + 1);
        let d = random_decomposition_on(&mut r, g.structure(), tree);
        // the precondition: m^{<n+1} does not embed into the tree
        if TreeDomain::complete(m, n + 1).embed_into(d.tree(), 64).unwrap().is_some() {
            refused += 1;
            continue;
        }
        let out = reduce_height(&d, n, m).map_err(|e| e.to_string())?;
        ensure(out.is_valid(g.structure()), || "invalid output".into())?;
        ensure(out.height() <= n, || format!("height {} > {n}", out.height()))?;
        ensure(out.width() < m as isize * (d.width() + 1), || "width bound violated".into())?;
        checked += 1;
    }
    ensure(checked >= 100, || format!("only {checked} inputs met the precondition"))?;
    Ok(format!("{checked} inputs ({refused} outside the precondition)"))
}

fn partition_conversion() -> Outcome {
    let (s, inc, pr) = example_refinement();
    ensure(pr.is_valid(&inc) && pr.width() == 4, || "example refinement".into())?;
    let (orig, d) = pr.to_tree_decomposition(&inc).map_err(|e| e.to_string())?;
    ensure(isomorphic(&orig, &s) && d.is_valid(&orig) && d.width() < 24, || format!("example width {}", d.width()))?;
    let mut r = rng(17);
    let mut done = 0;
    while done < 100 {
        let s = random_structure(&mut r, 6, 3);
        if s.is_empty() {
            continue;
        }
        let inc = to_incidence(&s);
        let pr = random_refinement(&mut r, &inc);
        ensure(pr.is_valid(&inc), || "random refinement invalid".into())?;
        let (orig, d) = pr.to_tree_decomposition(&inc).map_err(|e| e.to_string())?;
        let arity = s.signature().max_arity() as isize;
        ensure(d.is_valid(&orig), || "converted decomposition invalid".into())?;
        ensure(d.width() < (arity + 3) * pr.width() as isize, || "width bound violated".into())?;
        done += 1;
    }
    Ok(format!("example width {}, 100 random refinements", d.width()))
}

fn encodings() -> Outcome {
    let mut trees = 0;
    for m in 1..=6 {
        for t in all_trees(m).into_iter().filter(|t| t.height() <= 3) {
            let w = tree_word_encode(&t, 3).map_err(|e| e.to_string())?;
            ensure(tree_word_decode(&w).unwrap() == t, || format!("tree word {w:?}"))?;
            trees += 1;
        }
    }
    let mut r = rng(12);
    for _ in 0..100 {
        let s = random_structure(&mut r, 7, 3);
        let json = serde_json::to_string(&grid_encode(&s)).unwrap();
        let code: GridCode = serde_json::from_str(&json).unwrap();
        let back = grid_decode(&code).map_err(|e| e.to_string())?;
        ensure(isomorphic(&back.structure, &to_incidence(&s).structure), || "grid roundtrip".into())?;
    }
    let mut done = 0;
    while done < 100 {
        let s = random_structure(&mut r, 6, 3);
        let d = random_decomposition(&mut r, &s, 5);
        if d.width() > 3 {
            continue;
        }
        let code = decomposition_encode(&s, &d, 3).map_err(|e| e.to_string())?;
        let back = code.decode().map_err(|e| e.to_string())?;
        ensure(isomorphic(&back.structure, &to_incidence(&s).structure), || "decomposition roundtrip".into())?;
        done += 1;
    }
    let graphs = graph_catalogue(5);
    graphs.par_iter().try_for_each(|g| {
        let forms = |v: Vec<Graph>| v.iter().map(|h| canonical_form(h.structure())).collect::<BTreeSet<_>>();
        let sweep = forms(minor_sweep(g, 10).map_err(|e| e.to_string())?);
        let closure = forms(all_minors(g, 10).map_err(|e| e.to_string())?);
        ensure(sweep == closure, || format!("minor sweep of {:?}", g.edges()))
    })?;
    Ok(format!("{trees} trees, 100 grids, 100 decompositions, {} graphs", graphs.len()))
}

fn counting() -> Outcome {
    let b = count_b(2, 2, 1).map_err(|e| e.to_string())?;
    ensure(b.value == 12u32.into(), || format!("B(2,2,1) = {}", b.value))?;
    for n in 1..=4 {
        for k in 2..=5 {
            for c in 1..=3 {
                let b = count_b(n, k, c).map_err(|e| e.to_string())?;
                ensure(b.bounds_hold(), || format!("bounds fail at ({n},{k},{c})"))?;
            }
        }
    }
    Ok("B(2,2,1) = 12, 60 bound checks".into())
}

fn classifier() -> Outcome {
    let opts = ClassifyOptions::default();
    let cases = [
        ("paths", families::paths(1..=6), Level::Paths),
        ("grids", families::grids(1..=3), Level::Grids),
        ("stars", families::complete_trees(2, 1..=5), Level::T(2)),
        ("binary trees", families::binary_trees(1..=4), Level::Trees),
    ];
    let mut verdicts = Vec::new();
    for (name, samples, expected) in cases {
        let report = classify_family(&samples, &opts);
        ensure(report.verdict == expected, || format!("{name}: {} instead of {expected}", report.verdict))?;
        verdicts.push(format!("{name}→{expected}"));
    }
    Ok(verdicts.join(", "))
}

#[test]
fn acceptance() {
    let criteria: [(usize, &str, Duration, fn() -> Outcome); 14] = [
        (1, "1-sparsity of incidence structures", Duration::from_secs(10), sparsity),
        (2, "incidence roundtrip", Duration::from_secs(5), incidence_roundtrip),
        (3, "comorphism law", Duration::from_secs(300), comorphism),
        (4, "composition closure", Duration::from_secs(300), composition),
        (5, "union compositionality", Duration::from_secs(120), union_compositionality),
        (6, "width oracle consistency", Duration::from_secs(600), width_oracles),
        (7, "width inequalities", Duration::from_secs(600), width_inequalities),
        (8, "strictness pipeline", Duration::from_secs(120), strictness),
        (9, "DFS decomposition bounds", Duration::from_secs(60), dfs_bounds),
        (10, "height reduction", Duration::from_secs(60), height_reduction),
        (11, "partition conversion", Duration::from_secs(60), partition_conversion),
        (12, "encoding roundtrips", Duration::from_secs(300), encodings),
        (13, "counting B", Duration::from_secs(1), counting),
        (14, "classifier sanity", Duration::from_secs(300), classifier),
    ];
    // ACCEPTANCE_ONLY=3,4 runs a subset
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(_) if elapsed > limit => ("FAIL", format!("exceeded {limit:?}")),
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        // straight to the stream, so the line shows even when output is captured
        let line = format!("criterion {id:>2} {status} {name} [{:.2?} / {limit:?}] {detail}\n", elapsed);
        std::io::Write::write_all(&mut std::io::stderr(), line.as_bytes()).expect("stderr");
        if status == "FAIL" {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
