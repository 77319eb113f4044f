//! Three overlapping circuits where the settlement order matters: netting
//! the big circuit first uses up the shared edges, while starting with the
//! two small ones nets more overall.

use netting::ledger::{Circuit, DebtGraph};
use netting::settlement::{
    build_conflict_graph, optimize_order, plan_for_order, OptimizerConfig, OptimizerMode, SettlementPlan,
};

fn show(label: &str, plan: &SettlementPlan) {
    println!("{label}: total {}", plan.total);
    for step in &plan.steps {
        println!("    {:<12} x = {:>5}  amount = {:>6}", step.circuit.to_string(), step.per_edge, step.amount);
    }
    for c in &plan.skipped {
        println!("    {c} skipped (nothing left)");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = DebtGraph::from_edges(&[
        ("A", "B", 7000),
        ("B", "C", 7000),
        ("C", "D", 7000),
        ("D", "A", 7000),
        ("B", "E", 200),
        ("E", "F", 200),
        ("F", "D", 200),
        ("C", "G", 300),
        ("G", "H", 300),
        ("H", "B", 300),
    ])?;
    let circuits: Vec<Circuit> = ["A,B,C,D", "A,B,E,F,D", "B,C,G,H"]
        .into_iter()
        .map(Circuit::parse)
        .collect::<Result<_, _>>()?;

    let conflicts = build_conflict_graph(&graph, &circuits);
    for (&(i, j), w) in conflicts.edges() {
        println!("conflict {} / {}: {w}", circuits[i], circuits[j]);
    }

    show("exact", &optimize_order(&graph, &circuits, &OptimizerConfig::with_mode(OptimizerMode::Exact))?);
    show("greedy", &optimize_order(&graph, &circuits, &OptimizerConfig::with_mode(OptimizerMode::Greedy))?);
    show("big circuit first", &plan_for_order(&graph, &circuits));
    Ok(())
}
