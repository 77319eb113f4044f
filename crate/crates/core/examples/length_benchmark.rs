//! How circuit count and enumeration time grow with the length cap on a
//! sparse synthetic graph. Prints one CSV row per cap, ready for plotting.
//!
//! `cargo run --release --example length_benchmark -- [companies] [edges] [seed]`

use std::time::Instant;

use netting::circuits::EnumerationConfig;
use netting::datagen::{generate_synthetic_string, SyntheticConfig};
use netting::ledger::{ingest_csv, IngestMode};
use netting::pipeline::{analyze, default_parallelism};
use netting::settlement::OptimizerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let companies: usize = args.next().map_or(Ok(15_000), |a| a.parse())?;
    let edges: usize = args.next().map_or(Ok(50_000), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;

    let csv = generate_synthetic_string(&SyntheticConfig::new(companies, edges, seed))?;
    let graph = ingest_csv(csv.as_bytes(), IngestMode::Strict)?.graph;
    eprintln!("{} companies, {} edges", graph.vertex_count(), graph.edge_count());

    println!("max_len,circuits,settlements,netted,circuits_ms,plan_ms,total_ms");
    for max_len in 2..=8 {
        let t = Instant::now();
        let a = analyze(
            &graph,
            &EnumerationConfig::with_max_len(max_len),
            &OptimizerConfig::default(),
            default_parallelism(),
        )?;
        let total_ms = t.elapsed().as_secs_f64() * 1e3;
        let circuits: usize = a.components.iter().map(|c| c.enumeration.circuits.len()).sum();
        let steps: usize = a.plans.iter().map(|p| p.steps.len()).sum();
        let netted: u64 = a.plans.iter().map(|p| p.total).sum();
        println!(
            "{max_len},{circuits},{steps},{netted},{:.1},{:.1},{total_ms:.1}",
            a.timings.circuits, a.timings.plan
        );
    }
    Ok(())
}
