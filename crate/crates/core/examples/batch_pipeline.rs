//! Full batch run on generated data: every artifact lands in one directory
//! and the report summarizes the run.
//!
//! `cargo run --release --example batch_pipeline -- [companies] [edges] [out-dir]`

use std::path::PathBuf;

use netting::datagen::{generate_synthetic, SyntheticConfig};
use netting::pipeline::{emit_report_csv, run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let companies: usize = args.next().map_or(Ok(2_000), |a| a.parse())?;
    let edges: usize = args.next().map_or(Ok(7_000), |a| a.parse())?;
    let out: PathBuf = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("netting-batch"), PathBuf::from);

    std::fs::create_dir_all(&out)?;
    let input = out.join("invoices.csv");
    let invoices = generate_synthetic(
        &SyntheticConfig::new(companies, edges, 11),
        std::io::BufWriter::new(std::fs::File::create(&input)?),
    )?;
    println!("{invoices} invoices written to {}", input.display());

    let report = run_pipeline(&PipelineConfig::new(&input, &out))?;
    println!(
        "{} companies, {} edges, density {}",
        report.companies,
        report.edges,
        report.density.as_deref().unwrap_or("-")
    );
    println!(
        "{} circuits, {} settlements, {} netted",
        report.circuit_count, report.plan_steps, report.grand_total
    );
    print!("{}", emit_report_csv(&report));
    println!("artifacts in {}", out.display());
    Ok(())
}
