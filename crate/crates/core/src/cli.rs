//! Command-line front end.
//!
//! Each pipeline phase is its own subcommand reading and writing the same
//! files `run` produces, so a run can be split up, inspected or resumed:
//!
//! ```text
//! netting ingest   --input invoices.csv --output graph.json
//! netting scc      --graph graph.json
//! netting circuits --graph graph.json --max-len 8 --output circuits.txt
//! netting plan     --graph graph.json --circuits circuits.txt --output plans.json
//! netting replay   --graph graph.json --plans plans.json --output residual.json
//! netting run      --input invoices.csv --output-dir out/
//! netting gen      --companies 15000 --edges 50000 --seed 1 --output synth.csv
//! netting report   --report out/report.json
//! ```
//!
//! Every flag can also be set through a `NETTING_*` environment variable
//! (`--max-len` is `NETTING_MAX_LEN`, and so on).

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::circuits::{self, EnumerationConfig, DEFAULT_MAX_LEN};
use crate::datagen::{self, SyntheticConfig, WeightDistribution};
use crate::ledger::{DebtGraph, IngestMode};
use crate::pipeline::{self, PipelineConfig, PipelineError, PlansFile, RunReport};
use crate::scc;
use crate::settlement::{self, OptimizerConfig, OptimizerMode, DEFAULT_EXACT_CAP, DEFAULT_EXACT_THRESHOLD};

#[derive(Debug, Parser)]
#[command(name = "netting", version, about = "Multilateral debt netting over invoice graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate an invoice CSV into a graph snapshot.
    Ingest(IngestArgs),
    /// Print strongly connected component sizes as CSV.
    Scc(SccArgs),
    /// Enumerate bounded-length circuits, one per line.
    Circuits(CircuitsArgs),
    /// Order circuits into per-component settlement plans.
    Plan(PlanArgs),
    /// Apply plans to a graph and write the residual graph.
    Replay(ReplayArgs),
    /// Run every phase and write all artifacts to a directory.
    Run(RunArgs),
    /// Generate a seeded synthetic invoice CSV.
    Gen(GenArgs),
    /// Turn a run report into plot-ready CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, env = "NETTING_INPUT")]
    pub input: PathBuf,
    /// Skip malformed records instead of aborting.
    #[arg(long, env = "NETTING_LENIENT")]
    pub lenient: bool,
    /// Graph snapshot path; stdout when absent.
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SccArgs {
    #[arg(long, env = "NETTING_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerationArgs {
    /// Longest circuit, in companies.
    #[arg(long, env = "NETTING_MAX_LEN", default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    /// Stop a component after this many circuits.
    #[arg(long, env = "NETTING_MAX_CIRCUITS")]
    pub max_circuits: Option<usize>,
    /// Per-component time budget in seconds.
    #[arg(long, env = "NETTING_TIME_BUDGET", value_parser = parse_seconds)]
    pub time_budget: Option<Duration>,
}

impl EnumerationArgs {
    pub fn config(&self) -> EnumerationConfig {
        EnumerationConfig {
            max_len: self.max_len,
            max_circuits: self.max_circuits,
            per_scc_time_budget: self.time_budget,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    #[arg(long, env = "NETTING_MODE", value_enum, default_value_t = OptimizerMode::Auto)]
    pub mode: OptimizerMode,
    /// Auto mode solves conflict groups up to this size exactly.
    #[arg(long, env = "NETTING_EXACT_THRESHOLD", default_value_t = DEFAULT_EXACT_THRESHOLD)]
    pub exact_threshold: usize,
    /// Exact mode refuses components with more circuits than this.
    #[arg(long, env = "NETTING_EXACT_CAP", default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            mode: self.mode,
            exact_threshold: self.exact_threshold,
            exact_cap: self.exact_cap,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct CircuitsArgs {
    #[arg(long, env = "NETTING_GRAPH")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub enumeration: EnumerationArgs,
    #[arg(long, env = "NETTING_PARALLELISM", default_value_t = pipeline::default_parallelism())]
    pub parallelism: usize,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, env = "NETTING_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "NETTING_CIRCUITS")]
    pub circuits: PathBuf,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Plan truncated components anyway instead of failing.
    #[arg(long, env = "NETTING_LENIENT")]
    pub lenient: bool,
    #[arg(long, env = "NETTING_PARALLELISM", default_value_t = pipeline::default_parallelism())]
    pub parallelism: usize,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long, env = "NETTING_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "NETTING_PLANS")]
    pub plans: PathBuf,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, env = "NETTING_INPUT")]
    pub input: PathBuf,
    #[arg(long, env = "NETTING_OUTPUT_DIR")]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub enumeration: EnumerationArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long, env = "NETTING_LENIENT")]
    pub lenient: bool,
    #[arg(long, env = "NETTING_PARALLELISM", default_value_t = pipeline::default_parallelism())]
    pub parallelism: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, env = "NETTING_COMPANIES")]
    pub companies: usize,
    #[arg(long, env = "NETTING_EDGES")]
    pub edges: usize,
    #[arg(long, env = "NETTING_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "NETTING_MIN_WEIGHT", default_value_t = 100)]
    pub min_weight: u64,
    #[arg(long, env = "NETTING_MAX_WEIGHT", default_value_t = 1_000_000_000)]
    pub max_weight: u64,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, env = "NETTING_REPORT")]
    pub report: PathBuf,
    #[arg(long, env = "NETTING_OUTPUT")]
    pub output: Option<PathBuf>,
}

fn parse_seconds(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if !secs.is_finite() || secs <= 0.0 {
        return Err(format!("{s:?}: time budget must be a positive number of seconds"));
    }
    Ok(Duration::from_secs_f64(secs))
}

fn mode(lenient: bool) -> IngestMode {
    if lenient {
        IngestMode::Lenient
    } else {
        IngestMode::Strict
    }
}

fn positive(phase: &'static str, name: &str, v: usize) -> Result<(), PipelineError> {
    if v == 0 {
        return Err(PipelineError::Format {
            phase,
            message: format!("--{name} must be positive"),
        });
    }
    Ok(())
}

/// Writes `bytes` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), PipelineError> {
    let (res, p) = match path {
        Some(p) => (std::fs::write(p, bytes), p.to_path_buf()),
        None => (stdout.write_all(bytes), PathBuf::from("<stdout>")),
    };
    res.map_err(|source| PipelineError::Io {
        phase: "write",
        path: p,
        source,
    })
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, PipelineError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Format {
        phase: "write",
        message: e.to_string(),
    })?;
    v.push(b'\n');
    Ok(v)
}

fn graph_bytes(g: &DebtGraph) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    g.write_json(&mut buf)
        .map_err(|source| PipelineError::Ledger { phase: "write", source })?;
    Ok(buf)
}

/// Executes a parsed command. Primary output goes to `stdout` when no
/// `--output` is given; diagnostics go to `stderr`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Ingest(a) => {
            let ingested = pipeline::read_invoices(&a.input, mode(a.lenient))?;
            for r in &ingested.rejected {
                let _ = writeln!(stderr, "ingest: skipped {r}");
            }
            emit(a.output.as_deref(), stdout, &graph_bytes(&ingested.graph)?)
        }
        Command::Scc(a) => {
            let g = pipeline::read_graph(&a.graph)?;
            let p = scc::tarjan(&g);
            let mut csv = String::from("component,size\n");
            for (i, c) in p.components().iter().enumerate() {
                csv.push_str(&format!("{i},{}\n", c.len()));
            }
            emit(a.output.as_deref(), stdout, csv.as_bytes())
        }
        Command::Circuits(a) => {
            positive("circuits", "parallelism", a.parallelism)?;
            let g = pipeline::read_graph(&a.graph)?;
            let p = scc::tarjan(&g);
            let cfg = a.enumeration.config();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(a.parallelism)
                .build()
                .map_err(|e| PipelineError::Format {
                    phase: "circuits",
                    message: e.to_string(),
                })?;
            let comps = pool.install(|| circuits::enumerate_partition(&g, &p, &cfg))?;
            if let Some((scc, t)) = pipeline::first_truncation(&comps) {
                let _ = writeln!(stderr, "circuits: SCC {scc} truncated ({})", t.as_str());
            }
            let mut buf = Vec::new();
            pipeline::write_circuits(&mut buf, &comps).expect("writing to memory");
            emit(a.output.as_deref(), stdout, &buf)
        }
        Command::Plan(a) => {
            positive("plan", "parallelism", a.parallelism)?;
            let g = pipeline::read_graph(&a.graph)?;
            let file = File::open(&a.circuits).map_err(|source| PipelineError::Io {
                phase: "plan",
                path: a.circuits.clone(),
                source,
            })?;
            let listing = pipeline::read_circuits(BufReader::new(file))?;
            if !a.lenient {
                if let Some(&(scc, t)) = listing.truncated.first() {
                    return Err(PipelineError::Truncated {
                        scc,
                        reason: t.as_str(),
                    });
                }
            }
            let comps = pipeline::group_by_scc(&scc::tarjan(&g), listing)?;
            let cfg = a.optimizer.config();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(a.parallelism)
                .build()
                .map_err(|e| PipelineError::Format {
                    phase: "plan",
                    message: e.to_string(),
                })?;
            let plans = pool.install(|| settlement::plan_components(&g, &comps, &cfg))?;
            emit(a.output.as_deref(), stdout, &json_bytes(&PlansFile::new(plans))?)
        }
        Command::Replay(a) => {
            let mut g = pipeline::read_graph(&a.graph)?;
            let plans: PlansFile = pipeline::read_json(&a.plans)?;
            let total = pipeline::replay_plans(&mut g, &plans.plans)?;
            if total != plans.grand_total {
                return Err(PipelineError::Format {
                    phase: "replay",
                    message: format!(
                        "replayed total {total} differs from recorded grand total {}",
                        plans.grand_total
                    ),
                });
            }
            let _ = writeln!(stderr, "replay: netted {total}");
            emit(a.output.as_deref(), stdout, &graph_bytes(&g)?)
        }
        Command::Run(a) => {
            positive("run", "parallelism", a.parallelism)?;
            let cfg = PipelineConfig {
                input: a.input.clone(),
                output_dir: a.output_dir.clone(),
                enumeration: a.enumeration.config(),
                optimizer: a.optimizer.config(),
                mode: mode(a.lenient),
                parallelism: a.parallelism,
            };
            let report = pipeline::run_pipeline(&cfg)?;
            let _ = writeln!(
                stdout,
                "companies={} edges={} sccs={} circuits={} steps={} grand_total={}",
                report.companies,
                report.edges,
                report.scc_count,
                report.circuit_count,
                report.plan_steps,
                report.grand_total
            );
            Ok(())
        }
        Command::Gen(a) => {
            let cfg = SyntheticConfig {
                companies: a.companies,
                edges: a.edges,
                seed: a.seed,
                weights: WeightDistribution::LogUniform {
                    min: a.min_weight,
                    max: a.max_weight,
                },
            };
            let csv = datagen::generate_synthetic_string(&cfg).map_err(|e| PipelineError::Format {
                phase: "gen",
                message: e.to_string(),
            })?;
            emit(a.output.as_deref(), stdout, csv.as_bytes())
        }
        Command::Report(a) => {
            let report: RunReport = pipeline::read_json(&a.report)?;
            emit(
                a.output.as_deref(),
                stdout,
                pipeline::emit_report_csv(&report).as_bytes(),
            )
        }
    }
}

/// Parses `args` and executes them, returning the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
