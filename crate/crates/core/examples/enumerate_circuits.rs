//! Bounded circuit enumeration on a complete four-company graph, with the
//! length cap and the circuit-count limit.

use netting::circuits::{enumerate_circuits, enumerate_circuits_with, EnumerationConfig};
use netting::ledger::DebtGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = ["A", "B", "C", "D"];
    let edges: Vec<(&str, &str, u64)> = names
        .iter()
        .flat_map(|&a| names.iter().filter(move |&&b| b != a).map(move |&b| (a, b, 1)))
        .collect();
    let graph = DebtGraph::from_edges(&edges)?;

    for max_len in 2..=4 {
        let found = enumerate_circuits(&graph, graph.vertices(), &EnumerationConfig::with_max_len(max_len))?;
        println!("max_len {max_len}: {} circuits", found.circuits.len());
    }

    let limited = EnumerationConfig {
        max_circuits: Some(5),
        ..EnumerationConfig::default()
    };
    let mut first = Vec::new();
    let truncated = enumerate_circuits_with(&graph, graph.vertices(), &limited, |c| first.push(c.to_string()))?;
    println!("first five in discovery order: {}", first.join(" | "));
    println!("truncated: {:?}", truncated.map(|t| t.as_str()));
    Ok(())
}
