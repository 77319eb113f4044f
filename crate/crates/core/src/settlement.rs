//! Settlement ordering.
//!
//! Settling circuits in different orders nets different totals, because a
//! settlement consumes the edges it shares with other circuits. The
//! objective is the sum over settled circuits of `x * k` (amount per edge
//! times circuit length).
//!
//! Three strategies are available:
//!
//! * **exact**: depth-first search over settlement sequences. A circuit
//!   whose value has dropped to zero can never recover (weights only
//!   decrease), so it is discarded as soon as it is seen. Sub-results are
//!   memoized on the set of live circuits plus the residual weights of the
//!   edges they use. Among optimal sequences the one with the
//!   lexicographically smallest list of step amounts wins, then the one with
//!   the smallest list of canonical circuit indices.
//! * **greedy**: repeatedly settle the circuit with the largest immediate
//!   gain, ties to the canonically smallest circuit.
//! * **auto**: split the circuits into groups that share no debt edge (the
//!   connected components of the conflict graph), then solve each group
//!   exactly when it is small enough and greedily otherwise. Groups are
//!   independent, so this is exact whenever every group is solved exactly.
//!
//! All strategies work on a scratch copy of the relevant edge weights and
//! leave the input graph untouched. [`replay`] applies a plan to a live
//! graph and checks every recorded amount.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::rc::Rc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{self, CircuitError, ComponentCircuits, EnumerationConfig, Truncation};
use crate::ledger::{Amount, Circuit, CompanyId, DebtGraph, LedgerError};
use crate::scc::SccPartition;

/// Largest circuit set the exact strategy accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 12;
/// Largest circuit group `auto` solves exactly by default.
pub const DEFAULT_EXACT_THRESHOLD: usize = 10;

#[derive(Debug, Error)]
pub enum SettlementError {
    #[error(
        "exact ordering refused for {circuits} circuits (cap {cap}); use the greedy or auto mode"
    )]
    ExactRefused { circuits: usize, cap: usize },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("stale plan at step {step} ({circuit}): recorded {expected} per edge, graph yields {found}")]
    StalePlan {
        step: usize,
        circuit: Circuit,
        expected: Amount,
        found: Amount,
    },

    #[error(transparent)]
    Ledger(#[from] LedgerError),

    #[error(transparent)]
    Circuits(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerMode {
    Exact,
    Greedy,
    #[default]
    Auto,
}

/// Deterministic tie-breaking rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Smaller step amounts first, then canonical circuit order.
    #[default]
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub mode: OptimizerMode,
    pub exact_threshold: usize,
    pub exact_cap: usize,
    pub tie_break: TieBreak,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            mode: OptimizerMode::Auto,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            exact_cap: DEFAULT_EXACT_CAP,
            tie_break: TieBreak::Canonical,
        }
    }
}

impl OptimizerConfig {
    pub fn with_mode(mode: OptimizerMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SettlementError> {
        if self.exact_threshold == 0 {
            return Err(SettlementError::InvalidConfig(
                "exact_threshold must be at least 1".into(),
            ));
        }
        if self.exact_cap > 64 {
            return Err(SettlementError::InvalidConfig(
                "exact_cap cannot exceed 64".into(),
            ));
        }
        if self.exact_threshold > self.exact_cap {
            return Err(SettlementError::InvalidConfig(format!(
                "exact_threshold {} exceeds exact_cap {}",
                self.exact_threshold, self.exact_cap
            )));
        }
        Ok(())
    }
}

/// How a plan's order was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exact,
    Greedy,
    /// Some circuit groups exact, some greedy.
    Mixed,
    /// Caller-supplied order.
    Given,
    /// Brute-force permutation search.
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub circuit: Circuit,
    /// Amount subtracted from every edge of the circuit.
    pub per_edge: Amount,
    /// `per_edge * circuit length`.
    pub amount: Amount,
}

/// Ordered settlements with their amounts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettlementPlan {
    /// Component index when the plan belongs to one SCC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scc: Option<usize>,
    pub strategy: Strategy,
    pub total: Amount,
    pub truncated: Option<Truncation>,
    pub steps: Vec<PlanStep>,
    /// Circuits that had nothing left to settle at their turn.
    pub skipped: Vec<Circuit>,
}

impl SettlementPlan {
    pub fn empty(strategy: Strategy) -> Self {
        Self {
            scc: None,
            strategy,
            total: 0,
            truncated: None,
            steps: Vec::new(),
            skipped: Vec::new(),
        }
    }

    pub fn order(&self) -> Vec<&Circuit> {
        self.steps.iter().map(|s| &s.circuit).collect()
    }
}

/// Circuits as nodes; an edge joins two circuits sharing a debt edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictGraph {
    nodes: Vec<Circuit>,
    edges: BTreeMap<(usize, usize), Amount>,
}

impl ConflictGraph {
    pub fn nodes(&self) -> &[Circuit] {
        &self.nodes
    }

    /// Conflict edges keyed by `(i, j)` with `i < j`.
    pub fn edges(&self) -> &BTreeMap<(usize, usize), Amount> {
        &self.edges
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<Amount> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Connected components as sorted node index lists, ordered by their
    /// smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut dsu = Dsu::new(self.nodes.len());
        for &(i, j) in self.edges.keys() {
            dsu.union(i, j);
        }
        dsu.groups()
    }
}

/// Builds the conflict graph of `circuits` over `g`.
///
/// The weight of a conflict is the most the two circuits can compete for on
/// their shared edges: the smallest shared edge weight, capped by the
/// smaller of the two circuit values. Node indices follow the input order.
pub fn build_conflict_graph(g: &DebtGraph, circuits: &[Circuit]) -> ConflictGraph {
    let mut by_edge: HashMap<(&CompanyId, &CompanyId), Vec<usize>> = HashMap::new();
    for (i, c) in circuits.iter().enumerate() {
        for edge in c.edges() {
            by_edge.entry(edge).or_default().push(i);
        }
    }
    let values: Vec<Amount> = circuits.iter().map(|c| g.circuit_value(c)).collect();
    let mut shared_min: BTreeMap<(usize, usize), Amount> = BTreeMap::new();
    for ((d, k), members) in &by_edge {
        if members.len() < 2 {
            continue;
        }
        let w = g.weight(d, k).unwrap_or(0);
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let slot = shared_min.entry((i.min(j), i.max(j))).or_insert(Amount::MAX);
                *slot = (*slot).min(w);
            }
        }
    }
    let edges = shared_min
        .into_iter()
        .map(|((i, j), w)| ((i, j), w.min(values[i]).min(values[j])))
        .collect();
    ConflictGraph {
        nodes: circuits.to_vec(),
        edges,
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.parent.len() {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        // roots are group minima, so BTreeMap order is by smallest member
        by_root.into_values().collect()
    }
}

/// Scratch weights for the edges used by a circuit list.
struct Model {
    lens: Vec<Amount>,
    slots: Vec<Vec<usize>>,
    weights: Vec<Amount>,
}

impl Model {
    fn new(g: &DebtGraph, circuits: &[Circuit]) -> Self {
        let mut slot_of: HashMap<(usize, usize), usize> = HashMap::new();
        let mut weights = Vec::new();
        let mut slots = Vec::with_capacity(circuits.len());
        for c in circuits {
            let mut cs = Vec::with_capacity(c.len());
            for (d, k) in c.edges() {
                let w = g.weight(d, k).unwrap_or(0);
                let key = match (g.index_of(d), g.index_of(k)) {
                    (Some(u), Some(v)) if w > 0 => (u, v),
                    // absent edge: a private zero slot
                    _ => (usize::MAX, weights.len()),
                };
                let slot = *slot_of.entry(key).or_insert_with(|| {
                    weights.push(w);
                    weights.len() - 1
                });
                cs.push(slot);
            }
            slots.push(cs);
        }
        Self {
            lens: circuits.iter().map(|c| c.len() as Amount).collect(),
            slots,
            weights,
        }
    }

    fn value(&self, i: usize) -> Amount {
        self.slots[i]
            .iter()
            .map(|&s| self.weights[s])
            .min()
            .unwrap_or(0)
    }

    fn apply(&mut self, i: usize, x: Amount) {
        for &s in &self.slots[i] {
            self.weights[s] -= x;
        }
    }

    fn restore(&mut self, i: usize, x: Amount) {
        for &s in &self.slots[i] {
            self.weights[s] += x;
        }
    }

    /// Groups of circuits that share no slot with each other.
    fn groups(&self) -> Vec<Vec<usize>> {
        let mut dsu = Dsu::new(self.slots.len());
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (i, cs) in self.slots.iter().enumerate() {
            for &s in cs {
                match owner.get(&s) {
                    Some(&j) => dsu.union(i, j),
                    None => {
                        owner.insert(s, i);
                    }
                }
            }
        }
        dsu.groups()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Step {
    idx: usize,
    per_edge: Amount,
    gain: Amount,
}

#[derive(Debug, Default)]
struct Best {
    total: Amount,
    steps: Vec<Step>,
}

fn tie_break(a: &[Step], b: &[Step]) -> Ordering {
    a.iter()
        .map(|s| s.gain)
        .cmp(b.iter().map(|s| s.gain))
        .then_with(|| a.iter().map(|s| s.idx).cmp(b.iter().map(|s| s.idx)))
}

struct ExactSearch<'m> {
    model: &'m mut Model,
    members: Vec<usize>,
    memo: HashMap<(u64, Vec<Amount>), Rc<Best>>,
}

impl ExactSearch<'_> {
    fn key(&self, live: u64) -> (u64, Vec<Amount>) {
        let mut slots: Vec<usize> = (0..self.members.len())
            .filter(|b| live >> b & 1 == 1)
            .flat_map(|b| self.model.slots[self.members[b]].iter().copied())
            .collect();
        slots.sort_unstable();
        slots.dedup();
        (live, slots.into_iter().map(|s| self.model.weights[s]).collect())
    }

    fn solve(&mut self, mask: u64) -> Rc<Best> {
        let mut live = 0u64;
        for b in 0..self.members.len() {
            if mask >> b & 1 == 1 && self.model.value(self.members[b]) > 0 {
                live |= 1 << b;
            }
        }
        if live == 0 {
            return Rc::new(Best::default());
        }
        let key = self.key(live);
        if let Some(hit) = self.memo.get(&key) {
            return Rc::clone(hit);
        }
        let mut best: Option<Best> = None;
        for b in 0..self.members.len() {
            if live >> b & 1 == 0 {
                continue;
            }
            let idx = self.members[b];
            let x = self.model.value(idx);
            let gain = x * self.model.lens[idx];
            self.model.apply(idx, x);
            let sub = self.solve(live & !(1 << b));
            self.model.restore(idx, x);

            let total = gain + sub.total;
            let mut steps = Vec::with_capacity(sub.steps.len() + 1);
            steps.push(Step {
                idx,
                per_edge: x,
                gain,
            });
            steps.extend_from_slice(&sub.steps);
            let better = match &best {
                None => true,
                Some(cur) => {
                    total > cur.total
                        || (total == cur.total && tie_break(&steps, &cur.steps) == Ordering::Less)
                }
            };
            if better {
                best = Some(Best { total, steps });
            }
        }
        let best = Rc::new(best.expect("at least one live circuit"));
        self.memo.insert(key, Rc::clone(&best));
        best
    }
}

fn solve_exact(model: &mut Model, members: &[usize]) -> Vec<Step> {
    debug_assert!(members.len() <= 64);
    let mut search = ExactSearch {
        model,
        members: members.to_vec(),
        memo: HashMap::new(),
    };
    let full = if members.len() == 64 {
        u64::MAX
    } else {
        (1u64 << members.len()) - 1
    };
    let best = search.solve(full);
    best.steps.clone()
}

fn solve_greedy(model: &mut Model, members: &[usize]) -> Vec<Step> {
    let mut heap: BinaryHeap<(Amount, Reverse<usize>)> = members
        .iter()
        .map(|&i| (model.value(i) * model.lens[i], Reverse(i)))
        .filter(|&(g, _)| g > 0)
        .collect();
    let mut steps = Vec::new();
    while let Some((stored, Reverse(idx))) = heap.pop() {
        let x = model.value(idx);
        let gain = x * model.lens[idx];
        if gain == 0 {
            continue;
        }
        if gain != stored {
            // values only fall, so a stale key is an upper bound
            heap.push((gain, Reverse(idx)));
            continue;
        }
        model.apply(idx, x);
        steps.push(Step {
            idx,
            per_edge: x,
            gain,
        });
    }
    steps
}

fn assemble(circuits: Vec<Circuit>, steps: Vec<Step>, strategy: Strategy) -> SettlementPlan {
    let mut used = vec![false; circuits.len()];
    for s in &steps {
        used[s.idx] = true;
    }
    let total = steps.iter().map(|s| s.gain).sum();
    let plan_steps = steps
        .iter()
        .map(|s| PlanStep {
            circuit: circuits[s.idx].clone(),
            per_edge: s.per_edge,
            amount: s.gain,
        })
        .collect();
    let skipped = circuits
        .into_iter()
        .zip(used)
        .filter_map(|(c, u)| (!u).then_some(c))
        .collect();
    SettlementPlan {
        scc: None,
        strategy,
        total,
        truncated: None,
        steps: plan_steps,
        skipped,
    }
}

/// Computes a settlement order for `circuits` against `g` without mutating
/// `g`. Duplicate circuits are collapsed and the rest put in canonical order.
pub fn optimize_order(
    g: &DebtGraph,
    circuits: &[Circuit],
    cfg: &OptimizerConfig,
) -> Result<SettlementPlan, SettlementError> {
    cfg.validate()?;
    let mut cs = circuits.to_vec();
    cs.sort_unstable();
    cs.dedup();
    let mut model = Model::new(g, &cs);
    let all: Vec<usize> = (0..cs.len()).collect();

    let (steps, strategy) = match cfg.mode {
        OptimizerMode::Exact => {
            if cs.len() > cfg.exact_cap {
                return Err(SettlementError::ExactRefused {
                    circuits: cs.len(),
                    cap: cfg.exact_cap,
                });
            }
            (solve_exact(&mut model, &all), Strategy::Exact)
        }
        OptimizerMode::Greedy => (solve_greedy(&mut model, &all), Strategy::Greedy),
        OptimizerMode::Auto => {
            let mut steps = Vec::new();
            let (mut exact, mut greedy) = (0, 0);
            for group in model.groups() {
                if group.len() <= cfg.exact_threshold {
                    exact += 1;
                    steps.extend(solve_exact(&mut model, &group));
                } else {
                    greedy += 1;
                    steps.extend(solve_greedy(&mut model, &group));
                }
            }
            let strategy = match (exact, greedy) {
                (_, 0) => Strategy::Exact,
                (0, _) => Strategy::Greedy,
                _ => Strategy::Mixed,
            };
            (steps, strategy)
        }
    };
    Ok(assemble(cs, steps, strategy))
}

/// Settles `order` as given on a scratch copy of `g`, skipping circuits with
/// nothing left at their turn.
pub fn plan_for_order(g: &DebtGraph, order: &[Circuit]) -> SettlementPlan {
    let mut work = g.clone();
    let mut plan = SettlementPlan::empty(Strategy::Given);
    for c in order {
        let x = work.circuit_value(c);
        if x == 0 {
            plan.skipped.push(c.clone());
            continue;
        }
        work.settle(c).expect("positive value implies every edge is present");
        let amount = x * c.len() as Amount;
        plan.total += amount;
        plan.steps.push(PlanStep {
            circuit: c.clone(),
            per_edge: x,
            amount,
        });
    }
    plan
}

/// Applies `plan` to `g`, checking each recorded amount. Returns the netted
/// total. On a mismatch `g` is left exactly as it was.
pub fn replay(g: &mut DebtGraph, plan: &SettlementPlan) -> Result<Amount, SettlementError> {
    let mut work = g.clone();
    let mut total: Amount = 0;
    for (step, s) in plan.steps.iter().enumerate() {
        let found = work.circuit_value(&s.circuit);
        let k = s.circuit.len() as Amount;
        if found == 0 || found != s.per_edge || s.amount != found * k {
            return Err(SettlementError::StalePlan {
                step,
                circuit: s.circuit.clone(),
                expected: s.per_edge,
                found,
            });
        }
        work.settle(&s.circuit)?;
        total += s.amount;
    }
    *g = work;
    Ok(total)
}

/// Optimizes the circuits of each component, in parallel on the current
/// rayon pool. Truncation flags carry over into the plans.
pub fn plan_components(
    g: &DebtGraph,
    components: &[ComponentCircuits],
    cfg: &OptimizerConfig,
) -> Result<Vec<SettlementPlan>, SettlementError> {
    components
        .par_iter()
        .map(|cc| {
            let mut plan = optimize_order(g, &cc.enumeration.circuits, cfg)?;
            plan.scc = Some(cc.scc);
            plan.truncated = cc.enumeration.truncated;
            Ok(plan)
        })
        .collect()
}

/// Enumerates and orders circuits independently for every nontrivial SCC.
/// Components share no edges, so the plans commute.
pub fn plan_per_scc(
    g: &DebtGraph,
    partition: &SccPartition,
    enumeration: &EnumerationConfig,
    cfg: &OptimizerConfig,
) -> Result<Vec<SettlementPlan>, SettlementError> {
    cfg.validate()?;
    let comps = circuits::enumerate_partition(g, partition, enumeration)?;
    plan_components(g, &comps, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scc::tarjan;

    fn c(s: &str) -> Circuit {
        Circuit::parse(s).unwrap()
    }

    /// Three circuits sharing AB/DA and BC.
    fn overlap() -> DebtGraph {
        DebtGraph::from_edges(&[
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
        ])
        .unwrap()
    }

    fn overlap_circuits() -> Vec<Circuit> {
        vec![c("A,B,C,D"), c("A,B,E,F,D"), c("B,C,G,H")]
    }

    fn names(p: &SettlementPlan) -> Vec<String> {
        p.steps.iter().map(|s| s.circuit.to_string()).collect()
    }

    #[test]
    fn conflict_graph_of_overlap() {
        let cg = build_conflict_graph(&overlap(), &overlap_circuits());
        assert_eq!(cg.weight(0, 1), Some(200));
        assert_eq!(cg.weight(1, 0), Some(200));
        assert_eq!(cg.weight(0, 2), Some(300));
        assert_eq!(cg.weight(1, 2), None);
        assert_eq!(cg.components(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn conflict_weight_is_smallest_shared_edge() {
        let g = DebtGraph::from_edges(&[
            ("A", "B", 50),
            ("B", "C", 80),
            ("C", "A", 100),
            ("C", "D", 90),
            ("D", "A", 90),
        ])
        .unwrap();
        let cg = build_conflict_graph(&g, &[c("A,B,C"), c("A,B,C,D")]);
        assert_eq!(cg.weight(0, 1), Some(50));
    }

    #[test]
    fn disjoint_circuits_do_not_conflict() {
        let g = DebtGraph::from_edges(&[("A", "B", 1), ("B", "A", 1), ("C", "D", 1), ("D", "C", 1)])
            .unwrap();
        let cg = build_conflict_graph(&g, &[c("A,B"), c("C,D")]);
        assert!(cg.edges().is_empty());
        assert_eq!(cg.components(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn exact_order_on_overlap() {
        let plan =
            optimize_order(&overlap(), &overlap_circuits(), &OptimizerConfig::with_mode(OptimizerMode::Exact))
                .unwrap();
        assert_eq!(names(&plan), ["A,B,E,F,D", "B,C,G,H", "A,B,C,D"]);
        let amounts: Vec<_> = plan.steps.iter().map(|s| s.amount).collect();
        assert_eq!(amounts, [1000, 1200, 26_800]);
        assert_eq!(plan.total, 29_000);
        assert!(plan.skipped.is_empty());
    }

    #[test]
    fn greedy_on_overlap_is_not_optimal() {
        let plan =
            optimize_order(&overlap(), &overlap_circuits(), &OptimizerConfig::with_mode(OptimizerMode::Greedy))
                .unwrap();
        assert_eq!(names(&plan), ["A,B,C,D"]);
        assert_eq!(plan.total, 28_000);
        assert_eq!(plan.skipped.len(), 2);
    }

    #[test]
    fn forced_orders_on_overlap() {
        let g = overlap();
        assert_eq!(plan_for_order(&g, &[c("A,B,E,F,D"), c("A,B,C,D")]).total, 28_200);
        let p = plan_for_order(&g, &[c("A,B,C,D"), c("A,B,E,F,D"), c("B,C,G,H")]);
        assert_eq!(p.total, 28_000);
        assert_eq!(p.skipped.len(), 2);
    }

    #[test]
    fn exact_refuses_above_cap() {
        let mut edges = Vec::new();
        let names: Vec<String> = (0..13).map(|i| format!("N{i:02}")).collect();
        for n in &names {
            edges.push(("HUB", n.as_str(), 1));
            edges.push((n.as_str(), "HUB", 1));
        }
        let g = DebtGraph::from_edges(&edges).unwrap();
        let cs: Vec<_> = names.iter().map(|n| Circuit::from_ids(&["HUB", n]).unwrap()).collect();
        let err = optimize_order(&g, &cs, &OptimizerConfig::with_mode(OptimizerMode::Exact))
            .unwrap_err();
        assert!(matches!(err, SettlementError::ExactRefused { circuits: 13, cap: 12 }));
        assert!(err.to_string().contains("greedy"));
        // auto splits the independent 2-circuits into singleton groups
        let plan = optimize_order(&g, &cs, &OptimizerConfig::default()).unwrap();
        assert_eq!(plan.strategy, Strategy::Exact);
        assert_eq!(plan.total, 26);
    }

    #[test]
    fn auto_falls_back_to_greedy_for_large_groups() {
        let cfg = OptimizerConfig {
            exact_threshold: 2,
            ..OptimizerConfig::default()
        };
        let plan = optimize_order(&overlap(), &overlap_circuits(), &cfg).unwrap();
        assert_eq!(plan.strategy, Strategy::Greedy);
        assert_eq!(plan.total, 28_000);
    }

    #[test]
    fn invalid_configs() {
        let bad = OptimizerConfig {
            exact_threshold: 0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            exact_threshold: 20,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_circuit_plan() {
        let g = DebtGraph::from_edges(&[("A", "B", 5), ("B", "C", 9), ("C", "A", 7)]).unwrap();
        let plan = optimize_order(&g, &[c("A,B,C")], &OptimizerConfig::default()).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.total, 15);
    }

    #[test]
    fn replay_overlap() {
        let mut g = overlap();
        let plan =
            optimize_order(&g, &overlap_circuits(), &OptimizerConfig::with_mode(OptimizerMode::Exact))
                .unwrap();
        assert_eq!(replay(&mut g, &plan).unwrap(), 29_000);
        let a = crate::ledger::CompanyId::new("A").unwrap();
        let b = crate::ledger::CompanyId::new("B").unwrap();
        assert_eq!(g.weight(&a, &b), Some(100));

        // replaying again finds nothing left and leaves the graph alone
        let before = g.clone();
        assert!(matches!(
            replay(&mut g, &plan),
            Err(SettlementError::StalePlan { step: 0, .. })
        ));
        assert_eq!(g, before);
    }

    #[test]
    fn replay_empty_plan() {
        let mut g = overlap();
        let before = g.clone();
        assert_eq!(replay(&mut g, &SettlementPlan::empty(Strategy::Exact)).unwrap(), 0);
        assert_eq!(g, before);
    }

    #[test]
    fn per_scc_plans() {
        let g = DebtGraph::from_edges(&[
            ("A", "B", 10),
            ("B", "C", 10),
            ("C", "A", 10),
            ("D", "E", 20),
            ("E", "F", 20),
            ("F", "D", 20),
        ])
        .unwrap();
        let plans = plan_per_scc(&g, &tarjan(&g), &EnumerationConfig::default(), &OptimizerConfig::default())
            .unwrap();
        let mut totals: Vec<_> = plans.iter().map(|p| p.total).collect();
        totals.sort_unstable();
        assert_eq!(totals, [30, 60]);
        assert!(plans.iter().all(|p| p.steps.len() == 1 && p.scc.is_some()));

        let dag = DebtGraph::from_edges(&[("A", "B", 1), ("B", "C", 1)]).unwrap();
        let none =
            plan_per_scc(&dag, &tarjan(&dag), &EnumerationConfig::default(), &OptimizerConfig::default())
                .unwrap();
        assert!(none.is_empty());

        let base = overlap();
        let plans =
            plan_per_scc(&base, &tarjan(&base), &EnumerationConfig::default(), &OptimizerConfig::default())
                .unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].total, 29_000);
    }

    #[test]
    fn plan_json_field_order() {
        let plan = plan_for_order(&overlap(), &[c("A,B,C,D")]);
        let json = serde_json::to_string(&plan).unwrap();
        assert_eq!(
            json,
            r#"{"strategy":"given","total":28000,"truncated":null,"steps":[{"circuit":["A","B","C","D"],"per_edge":7000,"amount":28000}],"skipped":[]}"#
        );
    }
}
