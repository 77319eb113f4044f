//! Settling a four-company circuit removes the edge that carried the
//! minimum; the other edges stay available for later circuits.

use netting::ledger::{Circuit, DebtGraph};

fn main() -> Result<(), netting::LedgerError> {
    let mut graph = DebtGraph::from_edges(&[
        ("A", "B", 1500),
        ("B", "C", 900),
        ("C", "D", 1200),
        ("D", "A", 600),
    ])?;
    let circuit = Circuit::parse("A,B,C,D")?;
    println!("value of {circuit}: {}", graph.circuit_value(&circuit));

    let x = graph.settle(&circuit)?;
    println!("netted {x} on every edge; {} edges left", graph.edge_count());
    for (debtor, creditor, amount) in graph.edges() {
        println!("  {debtor} -> {creditor}: {amount}");
    }

    // The circuit is now broken, so a second settlement is refused.
    assert!(graph.settle(&circuit).is_err());
    Ok(())
}
