//! Cross-checks the production algorithms against the brute-force oracles
//! on a batch of small random graphs.

use std::collections::BTreeSet;

use netting::circuits::{enumerate_circuits, EnumerationConfig};
use netting::ledger::DebtGraph;
use netting::oracle::{best_order_by_permutation, circuits_by_dfs, scc_by_closure, OracleBudget};
use netting::scc::tarjan;
use netting::settlement::{optimize_order, OptimizerConfig, OptimizerMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> DebtGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(0.35) {
                edges.push((format!("V{u}"), format!("V{v}"), rng.gen_range(1..=50)));
            }
        }
    }
    DebtGraph::from_edges(&edges).expect("valid edges")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = OracleBudget::default();
    let exact = OptimizerConfig::with_mode(OptimizerMode::Exact);
    let (mut checked, mut with_plans) = (0, 0);
    for _ in 0..200 {
        let n = rng.gen_range(2..=7);
        let g = random_graph(&mut rng, n);

        assert_eq!(tarjan(&g).normalized(), scc_by_closure(&g, &budget)?.normalized());

        let fast: BTreeSet<_> = enumerate_circuits(&g, g.vertices(), &EnumerationConfig::with_max_len(n))?
            .circuits
            .into_iter()
            .collect();
        let slow: BTreeSet<_> = circuits_by_dfs(&g, n, &budget)?.into_iter().collect();
        assert_eq!(fast, slow);

        let circuits: Vec<_> = fast.into_iter().take(6).collect();
        if !circuits.is_empty() {
            let plan = optimize_order(&g, &circuits, &exact)?;
            let brute = best_order_by_permutation(&g, &circuits, &budget)?;
            assert_eq!(plan.total, brute.total);
            with_plans += 1;
        }
        checked += 1;
    }
    println!("{checked} graphs checked, {with_plans} with settlement plans: all agree");
    Ok(())
}
