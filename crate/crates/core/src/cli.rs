//! Command-line surface. Every command emits one `RunRecord`, either as aligned
//! `key  value` lines or as a single JSON line.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::graphgen::{self, format_graph, gen_boll_digraph, gen_boll_graph, gen_in_out, gen_m_out, AnyGraph, GraphError};
use crate::oracle::{self, OracleError};
use crate::problab::{self, ProbError, Q};
use crate::solver::{self, Outcome, Preset, SolveParams, StartMode};
use crate::tsp::{self, TspError, WeightMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_CIRCUIT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const RECORD_HELP: &str = "\
Output records carry the fields: command, params, seed, outcome, metrics, artifacts,
and wall_ms when --timing is given. --format json prints the record as one JSON line;
the default table format prints the same values as `key  value` lines, with nested
fields joined by dots.

Exit status: 0 on success (solve: a verified circuit), 2 when solve finds no circuit,
1 on errors.";

#[derive(Debug, Parser)]
#[command(name = "hamperm", version, about = "Hamilton circuits by admissible permutations", after_help = RECORD_HELP)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "HAMPERM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Include wall time in the record.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Random graph stopped at minimum degree 2
    Boll,
    /// Random digraph stopped at the in/out threshold
    Dboll,
    /// m out-arcs per vertex
    Mout,
    /// Undirected image of mout
    Rm,
    /// i in-choices and o out-choices per vertex
    Inout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    #[value(name = "theoremA")]
    #[serde(rename = "theoremA")]
    TheoremA,
    #[value(name = "theoremD")]
    #[serde(rename = "theoremD")]
    TheoremD,
    Lemma1,
    Lemma2,
    #[value(name = "theoremE")]
    #[serde(rename = "theoremE")]
    TheoremE,
    Degree2,
    Uniquearc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Brute,
    Enumerate,
    Converge,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random host and write it as an edge list.
    Gen {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        i: usize,
        #[arg(long, default_value_t = 2)]
        o: usize,
        /// In/out degree threshold for dboll.
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a host file for a Hamilton circuit.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = BudgetArg::Default)]
        budget: BudgetArg,
        /// Wall-time cap in seconds for the thorough preset.
        #[arg(long, default_value_t = 60)]
        wall: u64,
        /// Start from a tour sharing no edge with the host.
        #[arg(long)]
        complement_start: bool,
    },
    /// Closed forms, estimates and censuses.
    Prob {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Sizes for the censuses, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Constant in the degree-2 bound.
        #[arg(long, default_value_t = std::f64::consts::E)]
        c: f64,
        /// Multiplier on the unique-arc bound.
        #[arg(long, default_value_t = 2.0)]
        slack: f64,
    },
    /// Exhaustive tools for small hosts.
    Oracle {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleMode::Brute)]
        mode: OracleMode,
    },
    /// Heuristic tour for a weight matrix file.
    Tsp {
        path: PathBuf,
        /// Evaluation budget.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetArg {
    Default,
    Thorough,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub outcome: String,
    pub metrics: Value,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn to_table(&self) -> String {
        let v = serde_json::to_value(self).expect("records serialize");
        let mut rows = Vec::new();
        flatten("", &v, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:width$}  {v}\n")).collect()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::Array(a) => out.push((prefix.to_string(), a.iter().map(scalar).collect::<Vec<_>>().join(" "))),
        x => out.push((prefix.to_string(), scalar(x))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        x => x.to_string(),
    }
}

fn one_based(c: &[usize]) -> Vec<usize> {
    c.iter().map(|v| v + 1).collect()
}

fn q(x: Q) -> Value {
    json!({"exact": x.to_string(), "value": problab::to_f64(x)})
}

fn gen(model: Model, n: usize, m: usize, i: usize, o: usize, threshold: usize, seed: u64) -> Result<(AnyGraph, Value), CliError> {
    Ok(match model {
        Model::Boll => {
            let (g, stop) = gen_boll_graph(n, seed)?;
            (AnyGraph::Graph(g), json!({"stop": stop}))
        }
        Model::Dboll => {
            let (d, stop) = gen_boll_digraph(n, threshold, seed)?;
            (AnyGraph::Digraph(d), json!({"stop": stop}))
        }
        Model::Mout => (AnyGraph::Digraph(gen_m_out(n, m, seed)?), json!({})),
        Model::Rm => (AnyGraph::Graph(graphgen::to_undirected(&gen_m_out(n, m, seed)?)), json!({})),
        Model::Inout => (AnyGraph::Digraph(gen_in_out(n, i, o, seed)?), json!({})),
    })
}

fn graph_summary(g: &AnyGraph) -> Value {
    match g {
        AnyGraph::Graph(g) => json!({"directed": false, "n": g.order(), "m": g.edge_count(), "min_degree": g.min_degree()}),
        AnyGraph::Digraph(d) => json!({
            "directed": true, "n": d.order(), "m": d.arc_count(),
            "min_outdeg": d.min_outdeg(), "min_indeg": d.min_indeg(),
        }),
    }
}

/// Runs one command, writing its record to `out`, and returns the exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let t0 = Instant::now();
    let seed = cli.seed;
    let mut status = EXIT_OK;
    let mut artifacts = Vec::new();
    let (command, params, outcome, metrics) = match &cli.command {
        Command::Gen { model, n, m, i, o, threshold, out: path } => {
            let (g, extra) = gen(*model, *n, *m, *i, *o, *threshold, seed)?;
            let text = format_graph(&g);
            match path {
                Some(p) => {
                    std::fs::write(p, &text)?;
                    artifacts.push(p.display().to_string());
                }
                None => out.write_all(text.as_bytes())?,
            }
            let mut metrics = graph_summary(&g);
            merge(&mut metrics, extra);
            let params = json!({"model": model, "n": n, "m": m, "i": i, "o": o, "threshold": threshold});
            ("gen", params, "written".to_string(), metrics)
        }
        Command::Solve { path, budget, wall, complement_start } => {
            let g = graphgen::read_graph(path)?;
            let mut p = SolveParams::new(seed);
            if *budget == BudgetArg::Thorough {
                p = SolveParams::thorough(seed, Duration::from_secs(*wall));
            }
            if *complement_start {
                p.start = StartMode::Complement;
            }
            let rep = solver::solve(&g, &p);
            status = if rep.outcome == Outcome::Circuit { EXIT_OK } else { EXIT_NO_CIRCUIT };
            let outcome = serde_json::to_value(rep.outcome).unwrap().as_str().unwrap().to_string();
            let metrics = json!({
                "circuit": rep.circuit.as_deref().map(one_based),
                "verified": rep.circuit.as_deref().map(|c| solver::verify(&g, c)),
                "reason": rep.reason,
                "contracted_order": rep.contracted_order,
                "iterations": rep.iterations,
                "successes": rep.successes,
                "failures": rep.failures,
                "backtracks": rep.backtracks,
                "rotations": rep.rotations,
                "flips": rep.flips,
                "final_pseudo": rep.final_pseudo,
                "pseudo_trajectory": rep.trajectory,
            });
            let preset = if *budget == BudgetArg::Thorough { Preset::Thorough } else { Preset::Default };
            let params = json!({
                "path": path.display().to_string(), "budget": preset,
                "wall": wall, "start": p.start, "graph": graph_summary(&g),
            });
            ("solve", params, outcome, metrics)
        }
        Command::Prob { which, n, trials, sizes, seeds, c, slack } => {
            let metrics = prob(*which, *n, *trials, sizes, *seeds, *c, *slack, seed)?;
            let params = json!({"which": which, "n": n, "trials": trials, "sizes": sizes, "seeds": seeds, "c": c, "slack": slack});
            let pass = metrics.get("pass").and_then(Value::as_bool);
            let outcome = match pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "done",
            };
            ("prob", params, outcome.to_string(), metrics)
        }
        Command::Oracle { path, mode } => {
            let g = graphgen::read_graph(path)?;
            let host: &dyn crate::tour::Host = match &g {
                AnyGraph::Graph(g) => g,
                AnyGraph::Digraph(d) => d,
            };
            let metrics = match mode {
                OracleMode::Brute => {
                    let cs = oracle::brute_force_circuits(host)?;
                    json!({"count": cs.len(), "circuits": cs.iter().map(|c| one_based(c)).collect::<Vec<_>>()})
                }
                OracleMode::Enumerate => {
                    let cs = oracle::enumerate_all(host, None, seed)?;
                    json!({"count": cs.len(), "circuits": cs.iter().map(|c| one_based(c)).collect::<Vec<_>>()})
                }
                OracleMode::Converge => {
                    let cs = oracle::brute_force_circuits(host)?;
                    match cs.first() {
                        None => json!({"target": null, "moves": []}),
                        Some(target) => {
                            let c = oracle::converge(host, target, seed)?;
                            json!({
                                "target": one_based(&c.target),
                                "start": one_based(&c.start),
                                "moves": c.moves.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                                "sigma_sizes": c.sigma_sizes,
                                "regime_held": c.regime_held,
                            })
                        }
                    }
                }
            };
            let outcome = if metrics["count"].as_u64() == Some(0) || metrics["target"].is_null() && *mode == OracleMode::Converge {
                "none"
            } else {
                "found"
            };
            ("oracle", json!({"path": path.display().to_string(), "mode": mode}), outcome.to_string(), metrics)
        }
        Command::Tsp { path, budget } => {
            let wm = WeightMatrix::read(path)?;
            let r = tsp::tsp_solve(&wm, seed, *budget)?;
            let metrics = json!({
                "tour": one_based(&r.tour),
                "weight": r.weight,
                "initial_weight": r.initial_weight,
                "steps": r.trace.len(),
                "exhausted": r.exhausted,
                "trace": r.trace,
            });
            let outcome = if r.exhausted { "budget" } else { "local_optimum" };
            ("tsp", json!({"path": path.display().to_string(), "budget": budget}), outcome.to_string(), metrics)
        }
    };
    let rec = RunRecord {
        command: command.to_string(),
        params,
        seed,
        outcome,
        metrics,
        artifacts,
        wall_ms: cli.timing.then(|| t0.elapsed().as_millis() as u64),
    };
    let text = match cli.format {
        Format::Json => rec.to_json() + "\n",
        Format::Table => rec.to_table(),
    };
    out.write_all(text.as_bytes())?;
    Ok(status)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

#[allow(clippy::too_many_arguments)]
fn prob(which: Which, n: usize, trials: u64, sizes: &[usize], seeds: u64, c: f64, slack: f64, seed: u64) -> Result<Value, CliError> {
    Ok(match which {
        Which::TheoremA => {
            let s = problab::estimate_admissible_3cycle(n, trials, seed)?;
            json!({"closed_form": q(problab::p_admissible_3cycle(n)?), "stats": s})
        }
        Which::TheoremD => {
            let s = problab::estimate_chords_intersect(n, trials, seed)?;
            json!({"closed_form": q(problab::p_chords_intersect(n)?), "stats": s})
        }
        Which::Lemma1 => {
            let t = problab::lemma1_probs(n)?;
            let s = problab::estimate_lemma1_both(n, trials, seed)?;
            json!({"both": q(t[0]), "first_only": q(t[1]), "second_only": q(t[2]), "neither": q(t[3]), "stats_both": s})
        }
        Which::Lemma2 => {
            let t = problab::lemma2_probs(n)?;
            json!({"p3": q(t[0]), "p2": q(t[1]), "p1": q(t[2]), "p0": q(t[3])})
        }
        Which::TheoremE => {
            let (p, pc) = problab::p_two_admissible(n)?;
            json!({"p": q(p), "p_complement": q(pc), "sum": q(p + pc)})
        }
        Which::Degree2 | Which::Uniquearc => {
            if sizes.iter().any(|&s| s < 10) {
                return Err(CliError::Usage("census sizes must be at least 10".into()));
            }
            let rows = if which == Which::Degree2 {
                problab::degree2_census(sizes, seeds, c)
            } else {
                problab::unique_arc_census(sizes, seeds, slack)
            };
            let pass = rows.iter().all(|r| r.pass);
            let mut m = Map::new();
            m.insert("rows".into(), serde_json::to_value(rows).unwrap());
            m.insert("pass".into(), Value::Bool(pass));
            Value::Object(m)
        }
    })
}

/// Parses `args`, runs, and reports errors on stderr; returns the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
