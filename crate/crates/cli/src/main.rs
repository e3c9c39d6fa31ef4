use std::collections::BTreeMap;
use std::io::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tdhier::decomposition::{
    dfs_decomposition, exact_width, reduce_height, DecompositionJson, TreeDecomposition, WidthMode,
};
use tdhier::encodings::{
    decomposition_encode, format_word, grid_decode, grid_encode, minor_apply, minor_sweep, parse_word,
    tree_word_decode, tree_word_encode, DecompositionCode, DecompositionCodeJson, GridCode, MinorParams,
};
use tdhier::hierarchy::{classify_evidence, count_b, families, sample_evidence, verify_reduction, ClassifyOptions};
use tdhier::logic::{holds, TypeContext, TypeOptions};
use tdhier::partition::{PartitionRefinement, RefinementJson};
use tdhier::transduction::{backwards, compose, ApplyOptions, Transduction, TransductionJson};
use tdhier::{
    from_incidence, isomorphic, to_incidence, ColouredTree, Error, Formula, Graph, Structure,
    TreeMode,
};

type Result<T> = std::result::Result<T, Error>;

#[derive(Parser)]
#[command(name = "tdhier", version, about = "Structures, MSO transductions, tree decompositions and the incidence hierarchy")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for every random generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Size limit for exhaustive searches.
    #[arg(long, global = true, default_value_t = 16)]
    budget: usize,
    /// Worker threads for batch inputs; results keep input order.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Also write a Graphviz rendering of the main result to this file.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Relational structures.
    #[command(subcommand)]
    Structure(StructureCmd),
    /// MSO formulas.
    #[command(subcommand)]
    Logic(LogicCmd),
    /// MSO transductions.
    #[command(subcommand)]
    Transduce(TransduceCmd),
    /// Tree decompositions.
    #[command(subcommand)]
    Decomp(DecompCmd),
    /// Partition refinements of incidence structures.
    #[command(subcommand)]
    Partition(PartitionCmd),
    /// Encodings between levels of the hierarchy.
    #[command(subcommand)]
    Encode(EncodeCmd),
    /// Counting, classification and reductions.
    #[command(subcommand)]
    Hierarchy(HierarchyCmd),
}

#[derive(Subcommand)]
enum StructureCmd {
    /// The incidence structure.
    Incidence { input: PathBuf },
    /// The Gaifman graph.
    Gaifman { input: PathBuf },
    /// Whether every substructure has at most k times as many tuples as elements.
    Sparse {
        #[arg(long, default_value_t = 1)]
        k: usize,
        input: PathBuf,
    },
    /// Whether two structures are isomorphic.
    Iso { left: PathBuf, right: PathBuf },
    /// A random structure.
    Random {
        #[arg(long, default_value_t = 6)]
        max_elems: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
}

#[derive(Subcommand)]
enum LogicCmd {
    /// Evaluate a sentence.
    Eval {
        input: PathBuf,
        /// Formula text, or @file.
        formula: String,
    },
    /// Quantifier rank of a formula.
    Rank { formula: String },
    /// Group structures by their rank-m type.
    Types {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Largest cardinality modulus.
        #[arg(long, default_value_t = 2)]
        modulus: usize,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TransduceCmd {
    /// All outputs, or the output for fixed parameters.
    Apply {
        transduction: PathBuf,
        input: PathBuf,
        /// Comma-separated element lists, one per parameter, separated by ';'.
        #[arg(long)]
        params: Option<String>,
    },
    /// The formula that holds in A iff the sentence holds in some output.
    Backwards { transduction: PathBuf, formula: String },
    /// The transduction that applies `first`, then `second`.
    Compose { second: PathBuf, first: PathBuf },
}

#[derive(Subcommand)]
enum DecompCmd {
    /// Optimal width with a witness decomposition.
    Exact {
        #[arg(long, default_value = "twd")]
        mode: WidthMode,
        /// One width per input, in input order.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write the witness decomposition here (single input only).
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    Validate { input: PathBuf, decomposition: PathBuf },
    Strictify { input: PathBuf, decomposition: PathBuf },
    /// Decomposition along a depth-first search of the Gaifman graph.
    Dfs { input: PathBuf },
    /// Height reduction to height n for trees without m^{<n+1}.
    Reduce {
        input: PathBuf,
        decomposition: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum PartitionCmd {
    /// Check a refinement of the incidence structure of the input.
    Validate { input: PathBuf, refinement: PathBuf },
    /// Convert a refinement into a tree decomposition of the input.
    Convert { input: PathBuf, refinement: PathBuf },
}

#[derive(Subcommand)]
enum EncodeCmd {
    /// Successor tree to level word, or a word back to a tree.
    Treeword {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Decode this word (space-separated labels) instead.
        #[arg(long)]
        decode: Option<String>,
        input: Option<PathBuf>,
    },
    /// Structure to grid code, or a grid code back to the structure.
    Grid {
        #[arg(long)]
        decode: bool,
        input: PathBuf,
    },
    /// Structure and decomposition to a coloured-tree code, or back.
    Decomp {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        decode: bool,
        input: PathBuf,
        decomposition: Option<PathBuf>,
    },
    /// A minor chosen by vertex/edge parameters, or all minors with --sweep.
    Minor {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        delete_vertices: Vec<String>,
        /// Edges as a-b.
        #[arg(long, value_delimiter = ',')]
        delete_edges: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        contract: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        representatives: Vec<String>,
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Paths,
    Grids,
    Stars,
    BinaryTrees,
}

#[derive(Subcommand)]
enum HierarchyCmd {
    /// B(n, k, c) with its bounds.
    #[command(name = "countB")]
    CountB { n: usize, k: usize, c: usize },
    /// Evidence for the least class containing the samples.
    Classify {
        /// Generate samples of a canonical family instead of reading files.
        #[arg(long, value_enum)]
        family: Option<Family>,
        /// Sizes for --family, as lo..=hi.
        #[arg(long, default_value = "1..=5")]
        sizes: String,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        inputs: Vec<PathBuf>,
    },
    /// Whether every C-sample is an output of the transduction on some K-sample.
    Verify {
        transduction: PathBuf,
        #[arg(long = "c", required = true)]
        c: Vec<PathBuf>,
        #[arg(long = "k", required = true)]
        k: Vec<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn structure(path: &Path) -> Result<Structure> {
    Structure::from_json(&parse_json(path)?)
}

fn transduction(path: &Path) -> Result<Transduction> {
    Transduction::from_json(&parse_json::<TransductionJson>(path)?)
}

fn decomposition(path: &Path, s: &Structure) -> Result<TreeDecomposition> {
    TreeDecomposition::from_json(&parse_json::<DecompositionJson>(path)?, s)
}

fn formula(text: &str) -> Result<Formula> {
    let text = match text.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => text.to_string(),
    };
    text.trim().parse()
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// What a command produced: JSON, and the table rendering of it.
struct Output {
    json: Value,
    table: String,
    dot: Option<String>,
}

impl Output {
    fn new(json: Value, table: impl Into<String>) -> Self {
        Output {
            json,
            table: table.into(),
            dot: None,
        }
    }

    /// Output whose table form is pretty JSON.
    fn json(json: Value) -> Self {
        let table = serde_json::to_string_pretty(&json).expect("serializable");
        Output::new(json, table)
    }

    fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

fn structure_cmd(cmd: &StructureCmd, g: &Global) -> Result<Output> {
    Ok(match cmd {
        StructureCmd::Incidence { input } => {
            let inc = to_incidence(&structure(input)?);
            Output::json(to_value(inc.structure.to_json())).with_dot(inc.structure.gaifman().to_dot())
        }
        StructureCmd::Gaifman { input } => {
            let graph = structure(input)?.gaifman();
            Output::json(to_value(graph.structure().to_json())).with_dot(graph.to_dot())
        }
        StructureCmd::Sparse { k, input } => {
            let s = structure(input)?;
            let witness = s.sparsity_violation(*k);
            let table = witness.is_none().to_string();
            let json = json!({
                "sparse": witness.is_none(),
                "witness": witness.map(|(elems, why)| json!({
                    "elements": elems.iter().map(|&e| s.element(e)).collect::<Vec<_>>(),
                    "reason": why,
                })),
            });
            Output::new(json, table)
        }
        StructureCmd::Iso { left, right } => {
            let iso = isomorphic(&structure(left)?, &structure(right)?);
            Output::new(json!({ "isomorphic": iso }), iso.to_string())
        }
        StructureCmd::Random { max_elems, max_arity } => {
            let mut r = tdhier::random::rng(g.seed);
            let s = tdhier::random::random_structure(&mut r, *max_elems, *max_arity);
            Output::json(to_value(s.to_json()))
        }
    })
}

fn logic_cmd(cmd: &LogicCmd, _: &Global) -> Result<Output> {
    Ok(match cmd {
        LogicCmd::Eval { input, formula: f } => {
            let value = holds(&structure(input)?, &formula(f)?)?;
            Output::new(json!({ "holds": value }), value.to_string())
        }
        LogicCmd::Rank { formula: f } => {
            let rank = formula(f)?.rank();
            Output::new(json!({ "rank": rank }), rank.to_string())
        }
        LogicCmd::Types { rank, modulus, inputs } => {
            let samples = inputs.iter().map(|p| structure(p)).collect::<Result<Vec<_>>>()?;
            let sig = samples[0].signature().clone();
            let mut ctx = TypeContext::new(&sig, *modulus).with_options(TypeOptions {
                max_domain: TypeOptions::default().max_domain.max(8),
                max_rank: (*rank).max(TypeOptions::default().max_rank),
            });
            // classes numbered by first occurrence
            let mut class_of: BTreeMap<u32, usize> = BTreeMap::new();
            let mut classes = Vec::new();
            for s in &samples {
                if s.signature() != &sig {
                    return Err(Error::Signature("all inputs need the same signature".into()));
                }
                let id = ctx.type_id(s, &[], *rank)?;
                let next = class_of.len();
                classes.push(*class_of.entry(id).or_insert(next));
            }
            let table = inputs
                .iter()
                .zip(&classes)
                .map(|(p, c)| format!("{}\t{c}", p.display()))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(json!({ "rank": rank, "classes": classes }), table)
        }
    })
}

fn parse_params(text: &str, s: &Structure, p: usize) -> Result<Vec<u64>> {
    let groups: Vec<&str> = text.split(';').collect();
    if groups.len() != p {
        return Err(Error::Argument(format!("{} parameter sets given, transduction has {p}", groups.len())));
    }
    groups
        .iter()
        .map(|g| {
            g.split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .try_fold(0u64, |m, n| {
                    let i = s.index_of(n).ok_or_else(|| Error::Argument(format!("unknown element {n}")))?;
                    if i >= 64 {
                        return Err(Error::Budget {
                            what: "elements for parameters",
                            limit: 64,
                            actual: i + 1,
                        });
                    }
                    Ok(m | 1 << i)
                })
        })
        .collect()
}

fn transduce_cmd(cmd: &TransduceCmd, _: &Global) -> Result<Output> {
    Ok(match cmd {
        TransduceCmd::Apply { transduction: t, input, params } => {
            let t = transduction(t)?;
            let s = structure(input)?;
            let opts = ApplyOptions::default();
            let outs = match params {
                Some(text) => t.apply_with_params(&s, &parse_params(text, &s, t.p)?, &opts)?.into_iter().collect(),
                None => t.apply(&s, &opts)?,
            };
            let json = Value::Array(outs.iter().map(|o| to_value(o.to_json())).collect());
            let mut table = format!("{} outputs\n", outs.len());
            for o in &outs {
                table.push_str(&serde_json::to_string(&o.to_json()).expect("serializable"));
                table.push('\n');
            }
            let mut out = Output::new(json, table.trim_end());
            if let Some(first) = outs.first() {
                out = out.with_dot(first.gaifman().to_dot());
            }
            out
        }
        TransduceCmd::Backwards { transduction: t, formula: f } => {
            let back = backwards(&transduction(t)?, &formula(f)?)?;
            Output::new(json!({ "formula": back.to_string(), "rank": back.rank() }), back.to_string())
        }
        TransduceCmd::Compose { second, first } => {
            let c = compose(&transduction(second)?, &transduction(first)?)?;
            Output::json(to_value(c.to_json()))
        }
    })
}

fn decomposition_output(d: &TreeDecomposition, s: &Structure) -> Output {
    let table = format!(
        "width {} height {}\n{}",
        d.width(),
        d.height(),
        serde_json::to_string_pretty(&d.to_json(s)).expect("serializable")
    );
    let json = json!({ "width": d.width(), "height": d.height(), "decomposition": d.to_json(s) });
    Output::new(json, table).with_dot(d.to_dot(s))
}

fn decomp_cmd(cmd: &DecompCmd, g: &Global) -> Result<Output> {
    Ok(match cmd {
        DecompCmd::Exact { mode, inputs, witness } if inputs.len() > 1 => {
            if witness.is_some() {
                return Err(Error::Argument("--witness takes a single input".into()));
            }
            let widths = par_map(inputs, g.jobs, |p| structure(p).and_then(|s| exact_width(&s, *mode, g.budget)));
            let mut rows = Vec::new();
            let mut json_rows = Vec::new();
            for (p, w) in inputs.iter().zip(widths) {
                let (w, _) = w?;
                rows.push(format!("{}\t{w}", p.display()));
                json_rows.push(json!({ "input": p.display().to_string(), "width": w }));
            }
            Output::new(json!({ "mode": mode.to_string(), "results": json_rows }), rows.join("\n"))
        }
        DecompCmd::Exact { mode, inputs, witness } => {
            let s = structure(&inputs[0])?;
            let (w, d) = exact_width(&s, *mode, g.budget)?;
            if let Some(path) = witness {
                write(path, &serde_json::to_string_pretty(&d.to_json(&s)).expect("serializable"))?;
            }
            let json = json!({ "mode": mode.to_string(), "width": w, "witness": d.to_json(&s) });
            Output::new(json, w.to_string()).with_dot(d.to_dot(&s))
        }
        DecompCmd::Validate { input, decomposition: dp } => {
            let s = structure(input)?;
            let d = decomposition(dp, &s)?;
            let violations: Vec<String> = d.violations(&s).iter().map(ToString::to_string).collect();
            let table = if violations.is_empty() {
                format!("valid (width {}, height {})", d.width(), d.height())
            } else {
                format!("invalid\n{}", violations.join("\n"))
            };
            let json = json!({
                "valid": violations.is_empty(),
                "width": d.width(),
                "height": d.height(),
                "violations": violations,
            });
            Output::new(json, table)
        }
        DecompCmd::Strictify { input, decomposition: dp } => {
            let s = structure(input)?;
            decomposition_output(&decomposition(dp, &s)?.strictify(&s)?, &s)
        }
        DecompCmd::Dfs { input } => {
            let s = structure(input)?;
            decomposition_output(&dfs_decomposition(&s.gaifman()), &s)
        }
        DecompCmd::Reduce { input, decomposition: dp, n, m } => {
            let s = structure(input)?;
            decomposition_output(&reduce_height(&decomposition(dp, &s)?, *n, *m)?, &s)
        }
    })
}

fn partition_cmd(cmd: &PartitionCmd, _: &Global) -> Result<Output> {
    let (PartitionCmd::Validate { input, refinement } | PartitionCmd::Convert { input, refinement }) = cmd;
    let inc = to_incidence(&structure(input)?);
    let pr = PartitionRefinement::from_json(&parse_json::<RefinementJson>(refinement)?, &inc)?;
    Ok(match cmd {
        PartitionCmd::Validate { .. } => {
            let violations: Vec<String> = pr.violations(&inc).iter().map(ToString::to_string).collect();
            let table = if violations.is_empty() {
                format!("valid (width {})", pr.width())
            } else {
                format!("invalid\n{}", violations.join("\n"))
            };
            Output::new(
                json!({ "valid": violations.is_empty(), "width": pr.width(), "violations": violations }),
                table,
            )
        }
        PartitionCmd::Convert { .. } => {
            let (orig, d) = pr.to_tree_decomposition(&inc)?;
            decomposition_output(&d, &orig)
        }
    })
}

fn graph_edge(g: &Graph, text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once('-')
        .ok_or_else(|| Error::Argument(format!("edge {text:?} is not of the form a-b")))?;
    Ok((vertex(g, a)?, vertex(g, b)?))
}

fn vertex(g: &Graph, name: &str) -> Result<usize> {
    g.index_of(name.trim()).ok_or_else(|| Error::Argument(format!("unknown vertex {name}")))
}

fn encode_cmd(cmd: &EncodeCmd, g: &Global) -> Result<Output> {
    Ok(match cmd {
        EncodeCmd::Treeword { n, decode, input } => match (decode, input) {
            (Some(word), _) => {
                let tree = tree_word_decode(&parse_word(word)?)?;
                let s = ColouredTree::plain(tree.clone(), TreeMode::Successor).to_structure();
                Output::json(to_value(s.to_json())).with_dot(tdhier::dot::tree_dot(&tree, |v| tree.to_strings()[v].clone()))
            }
            (None, Some(path)) => {
                let t = ColouredTree::from_structure(&structure(path)?, TreeMode::Successor)?;
                let w = tree_word_encode(&t.domain, *n)?;
                Output::new(json!({ "n": n, "word": w }), format_word(&w))
            }
            (None, None) => return Err(Error::Argument("give a tree file or --decode WORD".into())),
        },
        EncodeCmd::Grid { decode, input } => {
            if *decode {
                let code: GridCode = parse_json(input)?;
                let inc = grid_decode(&code)?;
                let s = from_incidence(&inc.structure, &inc.original)?;
                Output::json(to_value(s.to_json()))
            } else {
                let code = grid_encode(&structure(input)?);
                let grid = code.to_structure()?;
                Output::json(to_value(&code)).with_dot(grid.gaifman().to_dot())
            }
        }
        EncodeCmd::Decomp { k, decode, input, decomposition: dp } => {
            if *decode {
                let code = DecompositionCode::from_json(&parse_json::<DecompositionCodeJson>(input)?)?;
                Output::json(to_value(code.decode_structure()?.to_json()))
            } else {
                let s = structure(input)?;
                let d = match dp {
                    Some(p) => decomposition(p, &s)?,
                    None => exact_width(&s, WidthMode::Tree, g.budget)?.1,
                };
                let code = decomposition_encode(&s, &d, *k)?;
                Output::json(to_value(code.to_json()))
            }
        }
        EncodeCmd::Minor { input, delete_vertices, delete_edges, contract, representatives, sweep } => {
            let graph = Graph::symmetrized(&structure(input)?)?;
            if *sweep {
                let minors = minor_sweep(&graph, g.budget)?;
                let json = Value::Array(minors.iter().map(|m| to_value(m.structure().to_json())).collect());
                return Ok(Output::new(json, format!("{} minors up to isomorphism", minors.len())));
            }
            let p = MinorParams {
                deleted_vertices: delete_vertices.iter().map(|v| vertex(&graph, v)).collect::<Result<_>>()?,
                deleted_edges: delete_edges.iter().map(|e| graph_edge(&graph, e)).collect::<Result<_>>()?,
                contracted: contract.iter().map(|e| graph_edge(&graph, e)).collect::<Result<_>>()?,
                representatives: representatives.iter().map(|v| vertex(&graph, v)).collect::<Result<_>>()?,
            };
            match minor_apply(&graph, &p) {
                Some(m) => Output::json(to_value(m.structure().to_json())).with_dot(m.to_dot()),
                None => return Err(Error::Argument("parameters do not describe a minor".into())),
            }
        }
    })
}

fn parse_sizes(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::Argument(format!("sizes {text:?} are not of the form lo..=hi"));
    let (lo, hi) = text.split_once("..=").ok_or_else(bad)?;
    Ok(lo.trim().parse().map_err(|_| bad())?..=hi.trim().parse().map_err(|_| bad())?)
}

/// Maps `f` over `items` on `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(jobs.max(1)).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    })
}

fn hierarchy_cmd(cmd: &HierarchyCmd, g: &Global) -> Result<Output> {
    Ok(match cmd {
        HierarchyCmd::CountB { n, k, c } => {
            let b = count_b(*n, *k, *c)?;
            let status = match &b.bounds {
                None => "bounds not applicable",
                Some(_) if b.bounds_hold() => "bounds OK",
                Some(_) => "bounds FAILED",
            };
            let json = json!({
                "n": n, "k": k, "c": c,
                "value": b.value.to_string(),
                "lower": b.bounds.as_ref().map(|(lo, _)| lo.to_string()),
                "upper": b.bounds.as_ref().map(|(_, hi)| hi.to_string()),
                "bounds_ok": b.bounds_hold(),
            });
            let table = match &b.bounds {
                Some((lo, hi)) => format!("{}\n{status}: {lo} <= {} <= {hi}", b.value, b.value),
                None => format!("{}\n{status}", b.value),
            };
            Output::new(json, table)
        }
        HierarchyCmd::Classify { family, sizes, max_depth, inputs } => {
            let samples = match family {
                Some(f) => {
                    let sizes = parse_sizes(sizes)?;
                    match f {
                        Family::Paths => families::paths(sizes),
                        Family::Grids => families::grids(sizes),
                        Family::Stars => families::complete_trees(2, sizes),
                        Family::BinaryTrees => families::binary_trees(sizes),
                    }
                }
                None => inputs.iter().map(|p| structure(p)).collect::<Result<_>>()?,
            };
            if samples.is_empty() {
                return Err(Error::Argument("no samples".into()));
            }
            let opts = ClassifyOptions {
                budget: g.budget,
                max_depth: *max_depth,
                ..ClassifyOptions::default()
            };
            let evidence = par_map(&samples, g.jobs, |s| sample_evidence(s, &opts).map_err(|e| e.to_string()));
            let report = classify_evidence(evidence, *max_depth);
            Output::new(to_value(&report), report.to_table().trim_end())
        }
        HierarchyCmd::Verify { transduction: t, c, k } => {
            let t = transduction(t)?;
            let cs = c.iter().map(|p| structure(p)).collect::<Result<Vec<_>>>()?;
            let ks = k.iter().map(|p| structure(p)).collect::<Result<Vec<_>>>()?;
            let opts = ApplyOptions::default();
            let check = verify_reduction(&cs, |s| t.apply(s, &opts), &ks)?;
            let mut table = check.holds.to_string();
            for (path, m) in c.iter().zip(&check.matching) {
                let target = match m {
                    Some((i, j)) => format!("output {j} of {}", k[*i].display()),
                    None => "no match".into(),
                };
                table.push_str(&format!("\n{}\t{target}", path.display()));
            }
            Output::new(to_value(&check), table)
        }
    })
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Structure(c) => structure_cmd(c, g),
        Command::Logic(c) => logic_cmd(c, g),
        Command::Transduce(c) => transduce_cmd(c, g),
        Command::Decomp(c) => decomp_cmd(c, g),
        Command::Partition(c) => partition_cmd(c, g),
        Command::Encode(c) => encode_cmd(c, g),
        Command::Hierarchy(c) => hierarchy_cmd(c, g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        if let (Some(path), Some(dot)) = (&cli.global.dot, &out.dot) {
            write(path, dot)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let text = match cli.global.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable"),
                Format::Table => out.table,
            };
            // a closed pipe downstream is not an error of ours
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
