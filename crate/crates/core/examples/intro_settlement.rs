//! Three companies owe each other in a ring; netting the ring clears the
//! smallest debt entirely and shrinks the other two.
//!
//! Run with `cargo run --example intro_settlement`.

use netting::circuits::{enumerate_circuits, EnumerationConfig};
use netting::ledger::{ingest_csv, IngestMode};

const INVOICES: &str = "\
invoice_id,debtor,creditor,amount_minor,issue_date
I1,A,B,32000,2019-03-01
I2,B,C,23000,2019-03-02
I3,C,A,25000,2019-03-03
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut graph = ingest_csv(INVOICES.as_bytes(), IngestMode::Strict)?.graph;
    let found = enumerate_circuits(&graph, graph.vertices(), &EnumerationConfig::default())?;

    for circuit in &found.circuits {
        let x = graph.settle(circuit)?;
        println!("settled {circuit}: {x} per edge, {} in total", x * circuit.len() as u64);
    }
    println!("remaining debts:");
    for (debtor, creditor, amount) in graph.edges() {
        println!("  {debtor} owes {creditor} {amount}");
    }
    Ok(())
}
