//! Strongly connected components: circuits never cross a component
//! boundary, so each component can be netted on its own.

use netting::ledger::DebtGraph;
use netting::scc::{nontrivial_components, tarjan};

fn main() -> Result<(), netting::LedgerError> {
    let graph = DebtGraph::from_edges(&[
        ("A", "B", 10),
        ("B", "C", 10),
        ("C", "A", 10),
        ("C", "D", 5), // one-way bridge
        ("D", "E", 7),
        ("E", "D", 3),
        ("E", "F", 1),
    ])?;
    let partition = tarjan(&graph);
    println!("component,size,members");
    for (i, members) in partition.components().iter().enumerate() {
        let names: Vec<&str> = members.iter().map(|m| m.as_str()).collect();
        println!("{i},{},{}", members.len(), names.join(" "));
    }
    println!(
        "{} of {} components can hold circuits",
        nontrivial_components(&partition, &graph).len(),
        partition.len()
    );
    Ok(())
}
