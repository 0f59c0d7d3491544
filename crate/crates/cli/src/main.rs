//! `lrec`: batch front end for the lrec-core library.
//!
//! Every subcommand writes JSON (or an S-expression for `compile`) to
//! `--out` or stdout. Failures print `{"error": kind, "message": ...}` to
//! stderr and exit with status 2; a check that runs but fails exits with 1.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lrec_core::balancer::{build_tree, check_tree};
use lrec_core::clogic::{parse_formula, Assignment, Evaluator, FormulaStore};
use lrec_core::corpus::{exhaustive_corpus, generate_corpus, Instance};
use lrec_core::dagstats::weights;
use lrec_core::intervals::interval_report;
use lrec_core::lrec::{parse_lformula, LrecEvaluator, TwoSortedAssignment};
use lrec_core::structure::{parse_structure, DiGraph, ElemId, Graph, ParsedStructure};
use lrec_core::wl::distinguish_report;
use lrec_core::wlcompile::{compile_x_formula, verify_compiled, CompileParams, CompiledFamily};
use lrec_core::xfix::{encode_tau_n, parse_condition, CardinalityCondition, XInstance};
use lrec_core::{Error, Result};

#[derive(Parser)]
#[command(name = "lrec", version, about = "Resource-bounded recursion, counting logic and WL experiments")]
struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for corpus sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a counting-logic formula on a structure.
    Eval {
        formula: PathBuf,
        structure: PathBuf,
        /// Variable binding `name=element`; repeatable.
        #[arg(long = "assign", value_name = "VAR=ELEM")]
        assign: Vec<String>,
    },
    /// Evaluate a two-sorted formula, lrec included.
    LrecEval {
        formula: PathBuf,
        structure: PathBuf,
        #[arg(long = "assign", value_name = "VAR=ELEM")]
        assign: Vec<String>,
        /// Number variable binding `name=value`; repeatable.
        #[arg(long = "num", value_name = "VAR=VALUE")]
        num: Vec<String>,
    },
    /// Table of `(v, i) ∈ X` for a graph with a cardinality condition.
    Oracle {
        graph: PathBuf,
        condition: PathBuf,
        /// Largest resource (default: n+1).
        #[arg(long)]
        i_max: Option<i64>,
    },
    /// Compile `φ_i` for graphs with at most `n` vertices.
    Compile {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        i: i64,
        /// Write formula statistics here (default: stderr).
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Optional instance to evaluate the formula on.
        #[command(flatten)]
        instance: OptionalInstance,
    },
    /// Write the τ encoding of a graph with a condition, for use with `eval`.
    Encode {
        #[arg(long)]
        n: usize,
        graph: PathBuf,
        condition: PathBuf,
    },
    /// Compare compiled formulas with the direct computation over a corpus.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Largest resource (default: n+1).
        #[arg(long)]
        i_max: Option<i64>,
        /// Use every rooted DAG with at most `n` vertices and every condition.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Build and check the balanced decomposition tree of a rooted DAG.
    Decompose { graph: PathBuf },
    /// Weights and multiplicities of a rooted DAG.
    Stats { graph: PathBuf },
    /// Run k-dimensional WL on two graphs of the same order.
    Wl {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 32)]
        max_rounds: usize,
        g1: PathBuf,
        g2: PathBuf,
    },
    /// Interval recognition, maxclique orders and modules.
    Interval { graph: PathBuf },
    /// Generate a corpus of rooted DAGs with conditions.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Enumerate all instances up to isomorphism instead of sampling.
        #[arg(long)]
        exhaustive: bool,
    },
}

#[derive(Args)]
struct OptionalInstance {
    #[arg(long, requires = "condition")]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    condition: Option<PathBuf>,
}

/// Successful run: the output text and whether all requested checks passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn json(v: Value, ok: bool) -> Self {
        Outcome { text: serde_json::to_string_pretty(&v).expect("json serializes"), ok }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

fn structure(path: &Path) -> Result<ParsedStructure> {
    parse_structure(&read(path)?)
}

fn digraph(path: &Path) -> Result<DiGraph> {
    DiGraph::from_parsed(&structure(path)?)
}

fn graph(path: &Path) -> Result<Graph> {
    Graph::from_structure(&structure(path)?.structure)
}

fn instance(graph: &Path, condition: &Path) -> Result<(DiGraph, CardinalityCondition, Vec<String>)> {
    let g = digraph(graph)?;
    let (c, warnings) = parse_condition(&read(condition)?, &g)?;
    Ok((g, c, warnings))
}

fn split_binding(b: &str) -> Result<(&str, &str)> {
    b.split_once('=').ok_or_else(|| Error::MalformedInput(format!("binding `{b}` is not NAME=VALUE")))
}

/// Elements are given by index or, when the structure names them, by name.
fn element(p: &ParsedStructure, text: &str) -> Result<ElemId> {
    if let Some(i) = p.names.as_ref().and_then(|ns| ns.iter().position(|n| n == text)) {
        return Ok(i as ElemId);
    }
    let e: ElemId = text.parse().map_err(|_| Error::MalformedInput(format!("unknown element `{text}`")))?;
    if e as usize >= p.structure.size() {
        return Err(Error::IdOutOfRange { id: e as u64, size: p.structure.size() });
    }
    Ok(e)
}

fn parse_value(v: &str) -> Result<Value> {
    serde_json::from_str(v).map_err(|e| Error::MalformedInput(e.to_string()))
}

fn instance_json(inst: &Instance) -> Result<Value> {
    Ok(json!({
        "id": inst.id,
        "graph": parse_value(&inst.graph.to_json())?,
        "condition": parse_value(&inst.condition.to_json())?,
    }))
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Eval { formula, structure: s, assign } => {
            let p = structure(s)?;
            let mut st = FormulaStore::new();
            let f = parse_formula(&mut st, &read(formula)?)?;
            let mut a = Assignment::new();
            for b in assign {
                let (v, e) = split_binding(b)?;
                a.set(v, element(&p, e)?);
            }
            let value = Evaluator::new(&st, &p.structure).eval(f, &a)?;
            Ok(Outcome::json(json!({ "value": value, "warnings": p.warnings }), true))
        }
        Command::LrecEval { formula, structure: s, assign, num } => {
            let p = structure(s)?;
            let f = parse_lformula(&read(formula)?)?;
            let mut a = TwoSortedAssignment::new();
            for b in assign {
                let (v, e) = split_binding(b)?;
                a = a.with_dom(v, element(&p, e)?);
            }
            for b in num {
                let (v, k) = split_binding(b)?;
                let k = k.parse().map_err(|_| Error::MalformedInput(format!("number `{k}`")))?;
                a = a.with_num(v, k);
            }
            let mut ev = LrecEvaluator::new(&p.structure);
            let value = ev.eval(&f, &a)?;
            let diagnostics: Vec<String> = p.warnings.iter().chain(ev.diagnostics()).cloned().collect();
            Ok(Outcome::json(json!({ "value": value, "diagnostics": diagnostics }), true))
        }
        Command::Oracle { graph, condition, i_max } => {
            let (g, c, warnings) = instance(graph, condition)?;
            let i_max = i_max.unwrap_or(g.n() as i64 + 1);
            let mut x = XInstance::new(g.clone(), c)?;
            let mut rows = Vec::new();
            for v in 0..g.n() as ElemId {
                let member = (1..=i_max).map(|i| x.compute_x(v, i)).collect::<Result<Vec<_>>>()?;
                rows.push(json!({ "v": v, "x": member }));
            }
            Ok(Outcome::json(json!({ "i_max": i_max, "rows": rows, "warnings": warnings }), true))
        }
        Command::Compile { n, r, i, stats, instance: inst } => {
            let params = CompileParams::new(*n, *r)?;
            let mut st = FormulaStore::new();
            let f = compile_x_formula(&mut st, params, *i)?;
            let s = st.stats(f);
            let mut report = json!({
                "n": n, "r": r, "i": i, "h": params.h,
                "qd": s.qd, "nvars": s.nvars, "dag_size": s.dag_size, "tree_size": s.tree_size,
            });
            if let (Some(gp), Some(cp)) = (&inst.graph, &inst.condition) {
                let (g, c, _) = instance(gp, cp)?;
                let tau = encode_tau_n(&g, &c, *n)?;
                let x_var = st.lookup_var("x").expect("compiled formulas use x");
                let mut ev = Evaluator::new(&st, &tau);
                let mut x = XInstance::new(g.clone(), c)?;
                let mut holds_at = Vec::new();
                let mut agrees = true;
                for v in 0..g.n() as ElemId {
                    let value = ev.eval_bound(f, &[(x_var, v)])?;
                    agrees &= value == x.compute_x(v, *i)?;
                    if value {
                        holds_at.push(v);
                    }
                }
                report["holds_at"] = json!(holds_at);
                report["agrees_with_oracle"] = json!(agrees);
            }
            let stats_text = serde_json::to_string_pretty(&report).expect("json serializes");
            match stats {
                Some(path) => write(Some(path), &stats_text)?,
                None => eprintln!("{stats_text}"),
            }
            let ok = report.get("agrees_with_oracle").and_then(Value::as_bool).unwrap_or(true);
            Ok(Outcome { text: st.to_sexpr_dag(f), ok })
        }
        Command::Encode { n, graph, condition } => {
            let (g, c, _) = instance(graph, condition)?;
            Ok(Outcome { text: encode_tau_n(&g, &c, *n)?.to_json(), ok: true })
        }
        Command::Verify { n, r, seed, count, i_max, exhaustive } => {
            let instances = if *exhaustive { exhaustive_corpus(*n)? } else { generate_corpus(*seed, 1, *n, *count)? };
            let params = CompileParams::new(*n, *r)?;
            let family = CompiledFamily::new(params, i_max.unwrap_or(*n as i64 + 1))?;
            let report = verify_compiled(&instances, &family)?;
            let summary = if report.agrees() {
                format!("all {} instances agree", report.instances)
            } else {
                format!("{} mismatches over {} instances", report.mismatches.len(), report.instances)
            };
            let ok = report.agrees();
            eprintln!("{summary}");
            Ok(Outcome::json(json!({ "summary": summary, "seed": seed, "report": report }), ok))
        }
        Command::Decompose { graph } => {
            let g = digraph(graph)?;
            let tree = build_tree(&g)?;
            let report = check_tree(&g, &tree)?;
            let ok = report.all_pass();
            Ok(Outcome::json(json!({ "tree": tree, "check": report }), ok))
        }
        Command::Stats { graph } => Ok(Outcome { text: weights(&digraph(graph)?)?.to_json(), ok: true }),
        Command::Wl { k, max_rounds, g1, g2 } => {
            let report = distinguish_report(&graph(g1)?, &graph(g2)?, *k, *max_rounds)?;
            Ok(Outcome::json(json!(report), true))
        }
        Command::Interval { graph: g } => Ok(Outcome::json(json!(interval_report(&graph(g)?)?), true)),
        Command::Corpus { seed, n_min, n_max, count, exhaustive } => {
            let instances =
                if *exhaustive { exhaustive_corpus(*n_max)? } else { generate_corpus(*seed, *n_min, *n_max, *count)? };
            let items = instances.iter().map(instance_json).collect::<Result<Vec<_>>>()?;
            Ok(Outcome::json(Value::Array(items), true))
        }
    }
}

fn write(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, format!("{text}\n")).map_err(|e| Error::MalformedInput(format!("{}: {e}", p.display())))
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::MalformedInput(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("{}", json!({ "error": "ThreadPool", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    match run(&cli).and_then(|o| write(cli.out.as_ref(), &o.text).map(|_| o.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
