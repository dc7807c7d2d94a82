//! `ksharp`: command-line front end for the K# toolkit.
//!
//! Exit codes: 0 yes/sat/valid, 1 no/unsat/invalid, 2 usage or input
//! error, 3 inconclusive (a budget ran out).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksharp::compile::{compile, compile_cnf};
use ksharp::formula::DagDump;
use ksharp::gnn::Gnn;
use ksharp::sat::{sat, valid, SatConfig, SatStats, SolverMode, Validity, Verdict};
use ksharp::translate::{translate, tune, BOOLEAN_STATE_CAVEAT};
use ksharp::verify::{verify, Answer, Problem};
use ksharp::{check, parse, BigRational, FormulaId, FormulaStore, LabeledGraph, PointedGraph};

const YES: u8 = 0;
const NO: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "ksharp", version, about = "Model checking, satisfiability and GNN verification for counting modal logic")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Print solver statistics to stderr.
    #[arg(long, global = true)]
    stats: bool,
    /// Maximum number of Hintikka sets the solver may examine.
    #[arg(long, global = true, value_name = "N")]
    budget: Option<usize>,
    /// Accepted for reproducible scripts; every command is deterministic.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a graph.
    Check {
        #[arg(long, value_name = "G.json")]
        graph: PathBuf,
        #[arg(long, value_name = "F")]
        formula: String,
        /// Vertex name; defaults to the graph's point, or every vertex.
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Decide satisfiability.
    Sat {
        #[arg(long, value_name = "F")]
        formula: String,
        /// general, degree:K or auto.
        #[arg(long, default_value = "general", value_parser = parse_mode)]
        mode: SolverMode,
        /// Write the witness pointed graph here.
        #[arg(long, value_name = "out.json")]
        witness: Option<PathBuf>,
    },
    /// Decide validity; prints a countermodel when there is one.
    Valid {
        #[arg(long, value_name = "F")]
        formula: String,
    },
    /// Build a GNN equivalent to a formula.
    Compile {
        #[arg(long, value_name = "F")]
        formula: String,
        /// Use the CNF construction with fewer layers.
        #[arg(long)]
        cnf: bool,
        #[arg(short, long, value_name = "net.json")]
        output: Option<PathBuf>,
    },
    /// Build a formula equivalent to a GNN.
    Translate {
        #[arg(long, value_name = "net.json")]
        gnn: PathBuf,
        #[arg(short, long, value_name = "formula.txt")]
        output: Option<PathBuf>,
        /// Also write the shared DAG as JSON.
        #[arg(long, value_name = "dag.json")]
        dag: Option<PathBuf>,
    },
    /// Run a GNN and print the verdict at every vertex.
    Run {
        #[arg(long, value_name = "net.json")]
        gnn: PathBuf,
        #[arg(long, value_name = "G.json")]
        graph: PathBuf,
    },
    /// Compare a GNN with a formula.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        #[arg(long, value_name = "net.json")]
        gnn: PathBuf,
        #[arg(long, value_name = "F")]
        formula: String,
        /// Write the separating or accepted pointed graph here.
        #[arg(long, value_name = "out.json")]
        witness: Option<PathBuf>,
    },
    /// Restrict a GNN to the models of a formula.
    Tune {
        #[arg(long, value_name = "net.json")]
        gnn: PathBuf,
        #[arg(long, value_name = "F")]
        formula: String,
        #[arg(short, long, value_name = "net.json")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    P1,
    P2,
    P3,
    P4,
}

impl From<VerifyMode> for Problem {
    fn from(m: VerifyMode) -> Self {
        match m {
            VerifyMode::P1 => Problem::P1,
            VerifyMode::P2 => Problem::P2,
            VerifyMode::P3 => Problem::P3,
            VerifyMode::P4 => Problem::P4,
        }
    }
}

fn parse_mode(s: &str) -> Result<SolverMode, String> {
    match s {
        "general" => Ok(SolverMode::General),
        "auto" => Ok(SolverMode::AutoFragment),
        _ => match s.strip_prefix("degree:").map(str::parse) {
            Some(Ok(k)) => Ok(SolverMode::BoundedDegree(k)),
            _ => Err(format!("expected general, degree:K or auto, got `{s}`")),
        },
    }
}

/// An input problem reported with exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Formula text, or `@path` naming a file with formula text or a DAG dump.
fn formula(store: &mut FormulaStore, arg: &str) -> Result<FormulaId, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => arg.to_owned(),
    };
    if text.trim_start().starts_with('{') {
        let dag: DagDump = serde_json::from_str(&text)?;
        return Ok(store.from_dag(&dag)?);
    }
    Ok(parse(store, text.trim())?)
}

fn load_gnn(path: &Path) -> Result<Gnn<BigRational>, Failure> {
    Gnn::parse_json(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<(LabeledGraph, Option<usize>), Failure> {
    LabeledGraph::parse_json(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn pretty<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

fn graph_json(w: &PointedGraph) -> String {
    pretty(&w.to_json())
}

impl Global {
    fn config(&self, mode: SolverMode) -> SatConfig {
        let mut c = SatConfig { mode, ..SatConfig::default() };
        if let Some(b) = self.budget {
            c.max_hintikka_sets = b;
        }
        c
    }

    fn report(&self, stats: &SatStats) {
        if self.stats {
            eprintln!("stats: {stats}");
        }
    }
}

fn caveat(boolean_states: bool) {
    if !boolean_states {
        eprintln!("{BOOLEAN_STATE_CAVEAT}");
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    let mut store = FormulaStore::new();
    match cli.command {
        Command::Check { graph, formula: text, vertex } => {
            let f = formula(&mut store, &text)?;
            let (graph, point) = load_graph(&graph)?;
            let at = match vertex {
                Some(name) => Some(graph.vertex(&name).ok_or_else(|| Failure(format!("no vertex named `{name}`")))?),
                None => point,
            };
            match at {
                Some(u) => {
                    let holds = check(&store, &graph, u, f);
                    println!("{}", if holds { "true" } else { "false" });
                    Ok(if holds { YES } else { NO })
                }
                None => {
                    for v in graph.vertices() {
                        println!("{}\t{}", graph.name(v), u8::from(check(&store, &graph, v, f)));
                    }
                    Ok(YES)
                }
            }
        }
        Command::Sat { formula: text, mode, witness } => {
            let f = formula(&mut store, &text)?;
            let r = sat(&mut store, f, g.config(mode))?;
            g.report(&r.stats);
            match r.verdict {
                Verdict::Sat(w) => {
                    println!("sat");
                    match witness {
                        Some(p) => write(&p, &graph_json(&w))?,
                        None => println!("{}", graph_json(&w)),
                    }
                    Ok(YES)
                }
                Verdict::Unsat => {
                    println!("unsat");
                    Ok(NO)
                }
                Verdict::Inconclusive(why) => {
                    println!("inconclusive: {why}");
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Valid { formula: text } => {
            let f = formula(&mut store, &text)?;
            let (v, stats) = valid(&mut store, f, g.config(SolverMode::General))?;
            g.report(&stats);
            match v {
                Validity::Valid => {
                    println!("valid");
                    Ok(YES)
                }
                Validity::Invalid(w) => {
                    println!("invalid");
                    println!("{}", graph_json(&w));
                    Ok(NO)
                }
                Validity::Inconclusive(why) => {
                    println!("inconclusive: {why}");
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Compile { formula: text, cnf, output } => {
            let f = formula(&mut store, &text)?;
            let net = if cnf {
                match compile_cnf(&store, f) {
                    Ok(net) => net,
                    Err(e) => {
                        eprintln!("{e}");
                        return Ok(INCONCLUSIVE);
                    }
                }
            } else {
                compile(&store, f)
            };
            emit(output.as_deref(), &pretty(&net.to_json()))?;
            Ok(YES)
        }
        Command::Translate { gnn, output, dag } => {
            let net = load_gnn(&gnn)?;
            let tr = translate(&mut store, &net);
            caveat(tr.boolean_states);
            if let Some(p) = dag {
                write(&p, &pretty(&store.to_dag(tr.root)))?;
            }
            emit(output.as_deref(), &store.display(tr.root).to_string())?;
            Ok(YES)
        }
        Command::Run { gnn, graph } => {
            let net = load_gnn(&gnn)?;
            let (graph, _) = load_graph(&graph)?;
            for (v, accepted) in net.classify_all(&graph).into_iter().enumerate() {
                println!("{}\t{}", graph.name(v), u8::from(accepted));
            }
            Ok(YES)
        }
        Command::Verify { mode, gnn, formula: text, witness } => {
            let net = load_gnn(&gnn)?;
            let f = formula(&mut store, &text)?;
            let r = verify(&mut store, mode.into(), &net, f, g.config(SolverMode::General))?;
            g.report(&r.stats);
            caveat(r.boolean_states);
            let (word, code, graph) = match r.answer {
                Answer::Yes(w) => ("yes", YES, w),
                Answer::No(w) => ("no", NO, w),
                Answer::Inconclusive(why) => {
                    println!("inconclusive: {why}");
                    return Ok(INCONCLUSIVE);
                }
            };
            println!("{word}");
            if let Some(w) = graph {
                match witness {
                    Some(p) => write(&p, &graph_json(&w))?,
                    None => println!("{}", graph_json(&w)),
                }
            }
            Ok(code)
        }
        Command::Tune { gnn, formula: text, output } => {
            let net = load_gnn(&gnn)?;
            let f = formula(&mut store, &text)?;
            let tuned = tune(&mut store, &net, f);
            caveat(tuned.boolean_states);
            emit(output.as_deref(), &pretty(&tuned.net.to_json()))?;
            Ok(YES)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
