//! Brute-force reference implementations.
//!
//! These exist to check the production algorithms on small inputs. They only
//! read the graph through its public edge listing and share no traversal or
//! settlement code with [`crate::scc`], [`crate::circuits`] or
//! [`crate::settlement`]:
//!
//! * SCCs from the boolean transitive closure (Floyd–Warshall);
//! * circuits by exhaustive simple-path search from each smallest vertex;
//! * the best settlement order by replaying every permutation.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use thiserror::Error;

use crate::ledger::{Amount, Circuit, CompanyId, DebtGraph};
use crate::scc::SccPartition;
use crate::settlement::{PlanStep, SettlementPlan, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_vertices: usize,
    pub max_circuits_for_permutation: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_vertices: 12,
            max_circuits_for_permutation: 8,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what}: size {size} exceeds the oracle budget {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

fn check(what: &'static str, size: usize, limit: usize) -> Result<(), OracleError> {
    if size > limit {
        return Err(OracleError::TooLarge { what, size, limit });
    }
    Ok(())
}

/// SCCs as classes of mutual reachability. Allows up to
/// `4 * max_vertices` vertices.
pub fn scc_by_closure(g: &DebtGraph, budget: &OracleBudget) -> Result<SccPartition, OracleError> {
    let ids: Vec<CompanyId> = g.vertices().to_vec();
    let n = ids.len();
    check("scc_by_closure vertices", n, budget.max_vertices * 4)?;
    let pos: HashMap<&CompanyId, usize> = ids.iter().enumerate().map(|(i, v)| (v, i)).collect();

    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (d, c, _) in g.edges() {
        reach[pos[d]][pos[c]] = true;
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (r, &v) in row.iter_mut().zip(&via) {
                *r |= v;
            }
        }
    }

    let mut assigned = vec![false; n];
    let mut comps = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let comp: Vec<CompanyId> = (i..n)
            .filter(|&j| reach[i][j] && reach[j][i])
            .inspect(|&j| assigned[j] = true)
            .map(|j| ids[j].clone())
            .collect();
        comps.push(comp);
    }
    Ok(SccPartition::from_components(comps))
}

/// All elementary circuits with at most `max_len` vertices, canonical and
/// sorted.
pub fn circuits_by_dfs(
    g: &DebtGraph,
    max_len: usize,
    budget: &OracleBudget,
) -> Result<Vec<Circuit>, OracleError> {
    check("circuits_by_dfs vertices", g.vertex_count(), budget.max_vertices)?;
    let mut succ: BTreeMap<&CompanyId, Vec<&CompanyId>> = BTreeMap::new();
    for (d, c, w) in g.edges() {
        if w > 0 {
            succ.entry(d).or_default().push(c);
        }
    }

    fn walk<'a>(
        succ: &BTreeMap<&'a CompanyId, Vec<&'a CompanyId>>,
        path: &mut Vec<&'a CompanyId>,
        max_len: usize,
        out: &mut Vec<Circuit>,
    ) {
        let start = path[0];
        let last = *path.last().expect("path starts non-empty");
        for &next in succ.get(last).map(Vec::as_slice).unwrap_or(&[]) {
            if next == start {
                if path.len() >= 2 {
                    let ids = path.iter().map(|&v| v.clone()).collect();
                    out.push(Circuit::new(ids).expect("simple path closes an elementary circuit"));
                }
            } else if next > start && !path.contains(&next) && path.len() < max_len {
                path.push(next);
                walk(succ, path, max_len, out);
                path.pop();
            }
        }
    }

    let mut out = Vec::new();
    for start in g.vertices() {
        let mut path = vec![start];
        walk(&succ, &mut path, max_len, &mut out);
    }
    out.sort();
    Ok(out)
}

/// Best settlement order found by replaying every permutation of
/// `circuits`. Circuits with nothing left at their turn are skipped. Among
/// equal totals the first permutation in lexicographic index order wins.
pub fn best_order_by_permutation(
    g: &DebtGraph,
    circuits: &[Circuit],
    budget: &OracleBudget,
) -> Result<SettlementPlan, OracleError> {
    check(
        "best_order_by_permutation circuits",
        circuits.len(),
        budget.max_circuits_for_permutation,
    )?;
    let weights: HashMap<(CompanyId, CompanyId), Amount> = g
        .edges()
        .map(|(d, c, w)| ((d.clone(), c.clone()), w))
        .collect();
    let keyed: Vec<Vec<(CompanyId, CompanyId)>> = circuits
        .iter()
        .map(|c| c.edges().map(|(a, b)| (a.clone(), b.clone())).collect())
        .collect();

    let mut best: Option<(Amount, Vec<(usize, Amount)>)> = None;
    for perm in (0..circuits.len()).permutations(circuits.len()) {
        let mut w = weights.clone();
        let mut total: Amount = 0;
        let mut steps = Vec::new();
        for &i in &perm {
            let x = keyed[i]
                .iter()
                .map(|e| w.get(e).copied().unwrap_or(0))
                .min()
                .unwrap_or(0);
            if x == 0 {
                continue;
            }
            for e in &keyed[i] {
                *w.get_mut(e).expect("edge with positive weight exists") -= x;
            }
            total += x * keyed[i].len() as Amount;
            steps.push((i, x));
        }
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, steps));
        }
    }

    let (total, steps) = best.unwrap_or((0, Vec::new()));
    let mut plan = SettlementPlan::empty(Strategy::Permutation);
    plan.total = total;
    let mut used = vec![false; circuits.len()];
    for (i, x) in steps {
        used[i] = true;
        plan.steps.push(PlanStep {
            circuit: circuits[i].clone(),
            per_edge: x,
            amount: x * circuits[i].len() as Amount,
        });
    }
    plan.skipped = circuits
        .iter()
        .zip(used)
        .filter(|(_, u)| !u)
        .map(|(c, _)| c.clone())
        .collect();
    Ok(plan)
}
