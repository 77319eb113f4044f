//! Batch pipeline: ingest, SCC, circuits, plan, replay.
//!
//! Every phase reads and writes plain files so phases can be run one at a
//! time (see the `netting` binary) and produce the same artifacts as a full
//! [`run_pipeline`]. Artifacts in the output directory:
//!
//! | file            | content                                            |
//! |-----------------|----------------------------------------------------|
//! | `graph.json`    | ingested debt graph snapshot                       |
//! | `circuits.txt`  | one canonical circuit per line, grouped by SCC     |
//! | `plans.json`    | per-SCC settlement plans and the grand total       |
//! | `residual.json` | graph snapshot after replaying every plan          |
//! | `report.json`   | [`RunReport`]                                      |
//!
//! Everything except the `timings_ms` field of the report is byte-identical
//! across runs with the same input and configuration.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{self, CircuitError, ComponentCircuits, Enumeration, EnumerationConfig, Truncation};
use crate::ledger::{self, Amount, Circuit, DebtGraph, IngestMode, Ingested, LedgerError};
use crate::scc::{self, SccPartition};
use crate::settlement::{self, OptimizerConfig, SettlementError, SettlementPlan, Strategy};

pub const GRAPH_FILE: &str = "graph.json";
pub const CIRCUITS_FILE: &str = "circuits.txt";
pub const PLANS_FILE: &str = "plans.json";
pub const RESIDUAL_FILE: &str = "residual.json";
pub const REPORT_FILE: &str = "report.json";

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INGEST: i32 = 3;
pub const EXIT_TRUNCATED: i32 = 4;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("ingest phase: {0}")]
    Ingest(#[source] LedgerError),

    #[error("circuits phase: enumeration of SCC {scc} truncated ({reason}) in strict mode")]
    Truncated { scc: usize, reason: &'static str },

    #[error("circuits phase: {0}")]
    Circuits(#[from] CircuitError),

    #[error("plan phase: {0}")]
    Plan(#[from] SettlementError),

    #[error("{phase} phase: {path}: {source}")]
    Io {
        phase: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{phase} phase: {message}")]
    Format { phase: &'static str, message: String },

    #[error("{phase} phase: {source}")]
    Ledger {
        phase: &'static str,
        #[source]
        source: LedgerError,
    },
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Ingest(_) => EXIT_INGEST,
            PipelineError::Truncated { .. } => EXIT_TRUNCATED,
            _ => EXIT_INTERNAL,
        }
    }

    fn io<'a>(phase: &'static str, path: &'a Path) -> impl FnOnce(std::io::Error) -> Self + 'a {
        move |source| PipelineError::Io {
            phase,
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(phase: &'static str, message: impl Into<String>) -> Self {
        PipelineError::Format {
            phase,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub enumeration: EnumerationConfig,
    pub optimizer: OptimizerConfig,
    /// Strict mode aborts on malformed invoices and on truncated
    /// enumeration; lenient mode skips and reports.
    pub mode: IngestMode,
    /// Worker threads for per-SCC work.
    pub parallelism: usize,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output_dir: output_dir.into(),
            enumeration: EnumerationConfig::default(),
            optimizer: OptimizerConfig::default(),
            mode: IngestMode::Strict,
            parallelism: default_parallelism(),
        }
    }
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub ingest: f64,
    pub scc: f64,
    pub circuits: f64,
    pub plan: f64,
    pub replay: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub scc: usize,
    pub scc_size: usize,
    pub circuits: usize,
    pub steps: usize,
    pub total: Amount,
    pub strategy: Strategy,
    pub truncated: Option<Truncation>,
}

/// Summary statistics of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub companies: usize,
    pub edges: usize,
    /// Exact density as `numerator/denominator`; absent below 2 vertices.
    pub density: Option<String>,
    pub density_approx: Option<f64>,
    pub invoices_accepted: usize,
    pub invoices_rejected: usize,
    pub max_len: usize,
    pub scc_count: usize,
    /// Component size -> number of components of that size.
    pub scc_sizes: BTreeMap<usize, usize>,
    /// Circuit length -> number of circuits of exactly that length.
    pub circuits_by_length: BTreeMap<usize, usize>,
    pub circuit_count: usize,
    pub plans: Vec<PlanSummary>,
    pub grand_total: Amount,
    pub plan_steps: usize,
    /// Circuits found per settlement step taken.
    pub circuits_per_step: Option<f64>,
    pub truncated: bool,
    pub timings_ms: PhaseTimings,
}

/// `plans.json` layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlansFile {
    pub grand_total: Amount,
    pub truncated: bool,
    pub plans: Vec<SettlementPlan>,
}

impl PlansFile {
    pub fn new(plans: Vec<SettlementPlan>) -> Self {
        Self {
            grand_total: plans.iter().map(|p| p.total).sum(),
            truncated: plans.iter().any(|p| p.truncated.is_some()),
            plans,
        }
    }
}

/// Output of the in-memory phases (SCC, circuits, plan).
#[derive(Debug, Clone)]
pub struct Analysis {
    pub partition: SccPartition,
    pub components: Vec<ComponentCircuits>,
    pub plans: Vec<SettlementPlan>,
    pub timings: PhaseTimings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| PipelineError::format("setup", e.to_string()))
}

/// Runs SCC decomposition, circuit enumeration and ordering on `g`.
pub fn analyze(
    g: &DebtGraph,
    enumeration: &EnumerationConfig,
    optimizer: &OptimizerConfig,
    parallelism: usize,
) -> Result<Analysis, PipelineError> {
    enumeration.validate()?;
    optimizer.validate()?;
    let mut timings = PhaseTimings::default();
    let t = Instant::now();
    let partition = scc::tarjan(g);
    timings.scc = ms(t);

    let pool = pool(parallelism)?;
    let t = Instant::now();
    let components = pool.install(|| circuits::enumerate_partition(g, &partition, enumeration))?;
    timings.circuits = ms(t);

    let t = Instant::now();
    let plans = pool.install(|| settlement::plan_components(g, &components, optimizer))?;
    timings.plan = ms(t);

    Ok(Analysis {
        partition,
        components,
        plans,
        timings,
    })
}

pub fn read_invoices(path: &Path, mode: IngestMode) -> Result<Ingested, PipelineError> {
    let file = File::open(path).map_err(PipelineError::io("ingest", path))?;
    ledger::ingest_csv(BufReader::new(file), mode).map_err(PipelineError::Ingest)
}

pub fn read_graph(path: &Path) -> Result<DebtGraph, PipelineError> {
    let text = fs::read_to_string(path).map_err(PipelineError::io("load", path))?;
    DebtGraph::from_json(&text).map_err(|source| PipelineError::Ledger {
        phase: "load",
        source,
    })
}

fn create(phase: &'static str, path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(PipelineError::io(phase, path))
}

pub fn write_graph(path: &Path, g: &DebtGraph) -> Result<(), PipelineError> {
    let mut w = create("write", path)?;
    g.write_json(&mut w).map_err(|source| PipelineError::Ledger {
        phase: "write",
        source,
    })?;
    w.flush().map_err(PipelineError::io("write", path))
}

/// Writes circuits one per line, ordered by component index and then
/// canonically. Truncated components get a `# truncated` comment line.
pub fn write_circuits<W: Write>(mut w: W, components: &[ComponentCircuits]) -> std::io::Result<()> {
    for cc in components {
        for c in &cc.enumeration.circuits {
            writeln!(w, "{c}")?;
        }
        if let Some(t) = cc.enumeration.truncated {
            writeln!(w, "# truncated scc={} reason={}", cc.scc, t.as_str())?;
        }
    }
    Ok(())
}

/// Circuit listing as read back from disk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CircuitListing {
    pub circuits: Vec<Circuit>,
    pub truncated: Vec<(usize, Truncation)>,
}

pub fn read_circuits<R: BufRead>(r: R) -> Result<CircuitListing, PipelineError> {
    let mut out = CircuitListing::default();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::format("plan", e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut scc = None;
            let mut reason = None;
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("scc=") {
                    scc = v.parse().ok();
                } else if let Some(v) = tok.strip_prefix("reason=") {
                    reason = Truncation::parse(v);
                }
            }
            if let (Some(s), Some(r)) = (scc, reason) {
                out.truncated.push((s, r));
            }
            continue;
        }
        let c = Circuit::parse(line).map_err(|e| {
            PipelineError::format("plan", format!("circuit listing line {}: {e}", i + 1))
        })?;
        out.circuits.push(c);
    }
    Ok(out)
}

/// Assigns circuits to the nontrivial components of `p`. Every nontrivial
/// component gets an entry, even without circuits.
pub fn group_by_scc(
    p: &SccPartition,
    listing: CircuitListing,
) -> Result<Vec<ComponentCircuits>, PipelineError> {
    let mut groups: BTreeMap<usize, Enumeration> = scc::nontrivial_indices(p)
        .into_iter()
        .map(|i| (i, Enumeration::default()))
        .collect();
    for c in listing.circuits {
        let comp = c.vertices().iter().map(|v| p.component_of(v)).collect::<Vec<_>>();
        let first = comp[0];
        let entry = match first {
            Some(i) if comp.iter().all(|&x| x == first) => groups.get_mut(&i),
            _ => None,
        };
        match entry {
            Some(e) => e.circuits.push(c),
            None => {
                return Err(PipelineError::format(
                    "plan",
                    format!("circuit {c} does not lie inside one component of the graph"),
                ))
            }
        }
    }
    for (scc, t) in listing.truncated {
        if let Some(e) = groups.get_mut(&scc) {
            e.truncated = Some(t);
        }
    }
    Ok(groups
        .into_iter()
        .map(|(scc, mut enumeration)| {
            enumeration.circuits.sort_unstable();
            enumeration.circuits.dedup();
            ComponentCircuits { scc, enumeration }
        })
        .collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut w = create("write", path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| PipelineError::format("write", e.to_string()))?;
    w.write_all(b"\n").map_err(PipelineError::io("write", path))?;
    w.flush().map_err(PipelineError::io("write", path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(PipelineError::io("load", path))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::format("load", format!("{}: {e}", path.display())))
}

/// Replays every plan in order on `g`.
pub fn replay_plans(g: &mut DebtGraph, plans: &[SettlementPlan]) -> Result<Amount, PipelineError> {
    let mut total = 0;
    for p in plans {
        total += settlement::replay(g, p)?;
    }
    Ok(total)
}

pub fn first_truncation(components: &[ComponentCircuits]) -> Option<(usize, Truncation)> {
    components
        .iter()
        .find_map(|c| c.enumeration.truncated.map(|t| (c.scc, t)))
}

/// Builds the report for an ingested graph and its analysis.
pub fn build_report(
    ingested: &Ingested,
    analysis: &Analysis,
    max_len: usize,
    timings: PhaseTimings,
) -> RunReport {
    let g = &ingested.graph;
    let density = g.density().ok();
    let mut scc_sizes = BTreeMap::new();
    for c in analysis.partition.components() {
        *scc_sizes.entry(c.len()).or_insert(0) += 1;
    }
    let mut circuits_by_length: BTreeMap<usize, usize> = (2..=max_len).map(|k| (k, 0)).collect();
    for cc in &analysis.components {
        for c in &cc.enumeration.circuits {
            *circuits_by_length.entry(c.len()).or_insert(0) += 1;
        }
    }
    let circuit_count = circuits_by_length.values().sum();
    let plans: Vec<PlanSummary> = analysis
        .plans
        .iter()
        .zip(&analysis.components)
        .map(|(p, cc)| PlanSummary {
            scc: cc.scc,
            scc_size: analysis.partition.components()[cc.scc].len(),
            circuits: cc.enumeration.circuits.len(),
            steps: p.steps.len(),
            total: p.total,
            strategy: p.strategy,
            truncated: p.truncated,
        })
        .collect();
    let plan_steps: usize = plans.iter().map(|p| p.steps).sum();
    RunReport {
        companies: g.vertex_count(),
        edges: g.edge_count(),
        density: density.map(|d| format!("{}/{}", d.numer(), d.denom())),
        density_approx: density.map(|d| *d.numer() as f64 / *d.denom() as f64),
        invoices_accepted: ingested.accepted,
        invoices_rejected: ingested.rejected.len(),
        max_len,
        scc_count: analysis.partition.len(),
        scc_sizes,
        circuits_by_length,
        circuit_count,
        grand_total: plans.iter().map(|p| p.total).sum(),
        plan_steps,
        circuits_per_step: (plan_steps > 0).then(|| circuit_count as f64 / plan_steps as f64),
        truncated: plans.iter().any(|p| p.truncated.is_some()),
        plans,
        timings_ms: timings,
    }
}

/// Full batch run. In strict mode nothing is written when the input has a
/// malformed record or any enumeration was truncated.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let t = Instant::now();
    let ingested = read_invoices(&cfg.input, cfg.mode)?;
    let ingest_ms = ms(t);

    let analysis = analyze(
        &ingested.graph,
        &cfg.enumeration,
        &cfg.optimizer,
        cfg.parallelism,
    )?;
    if cfg.mode == IngestMode::Strict {
        if let Some((scc, t)) = first_truncation(&analysis.components) {
            return Err(PipelineError::Truncated {
                scc,
                reason: t.as_str(),
            });
        }
    }

    let t = Instant::now();
    let mut residual = ingested.graph.clone();
    let replayed = replay_plans(&mut residual, &analysis.plans)?;
    let replay_ms = ms(t);

    let timings = PhaseTimings {
        ingest: ingest_ms,
        replay: replay_ms,
        ..analysis.timings
    };
    let report = build_report(&ingested, &analysis, cfg.enumeration.max_len, timings);
    debug_assert_eq!(replayed, report.grand_total);

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(PipelineError::io("write", dir))?;
    write_graph(&dir.join(GRAPH_FILE), &ingested.graph)?;
    let circuits_path = dir.join(CIRCUITS_FILE);
    let mut w = create("write", &circuits_path)?;
    write_circuits(&mut w, &analysis.components)
        .and_then(|_| w.flush())
        .map_err(PipelineError::io("write", &circuits_path))?;
    write_json(&dir.join(PLANS_FILE), &PlansFile::new(analysis.plans.clone()))?;
    write_graph(&dir.join(RESIDUAL_FILE), &residual)?;
    write_json(&dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

/// Plot-ready CSV: one row per circuit length with its count, the running
/// count up to that length and the run's phase timings.
pub fn emit_report_csv(report: &RunReport) -> String {
    let mut out =
        String::from("length,circuits,cumulative_circuits,ingest_ms,scc_ms,circuits_ms,plan_ms,replay_ms\n");
    let t = &report.timings_ms;
    let mut cumulative = 0;
    for (&len, &count) in &report.circuits_by_length {
        cumulative += count;
        out.push_str(&format!(
            "{len},{count},{cumulative},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            t.ingest, t.scc, t.circuits, t.plan, t.replay
        ));
    }
    out
}
