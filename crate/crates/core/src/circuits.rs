//! Length-bounded elementary circuit enumeration.
//!
//! This is Johnson's circuit search with a cap on the number of vertices in
//! a circuit. Start vertices are taken in ascending order and each search
//! only visits vertices greater than its start, so every circuit is found
//! exactly once, from its smallest vertex, already in canonical rotation.
//!
//! The cap interacts with Johnson's blocking: a vertex whose exploration was
//! cut short by the cap may still reach the start by a shorter route later,
//! so it must not stay blocked. A vertex is therefore unblocked when it
//! closed a circuit *or* when the cap was hit anywhere below it; only fully
//! explored, fruitless vertices stay blocked and go on the B-lists of their
//! successors.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{Circuit, CompanyId, DebtGraph};
use crate::scc::SccPartition;

/// Default circuit length cap: twice the most common settled length (4).
pub const DEFAULT_MAX_LEN: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("max_len must be at least 2, got {0}")]
    MaxLenTooSmall(usize),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(CompanyId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationConfig {
    /// Longest circuit, in vertices, that is reported.
    pub max_len: usize,
    /// Stop after emitting this many circuits per component.
    pub max_circuits: Option<usize>,
    /// Wall-clock budget per component.
    pub per_scc_time_budget: Option<Duration>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            max_len: DEFAULT_MAX_LEN,
            max_circuits: None,
            per_scc_time_budget: None,
        }
    }
}

impl EnumerationConfig {
    pub fn with_max_len(max_len: usize) -> Self {
        Self {
            max_len,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.max_len < 2 {
            return Err(CircuitError::MaxLenTooSmall(self.max_len));
        }
        Ok(())
    }
}

/// Why an enumeration stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    MaxCircuits,
    TimeBudget,
}

impl Truncation {
    pub fn as_str(self) -> &'static str {
        match self {
            Truncation::MaxCircuits => "max-circuits",
            Truncation::TimeBudget => "time-budget",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max-circuits" => Some(Truncation::MaxCircuits),
            "time-budget" => Some(Truncation::TimeBudget),
            _ => None,
        }
    }
}

/// Circuits of one vertex set, sorted, plus the truncation flag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Enumeration {
    pub circuits: Vec<Circuit>,
    pub truncated: Option<Truncation>,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    v: usize,
    next: usize,
    found: bool,
    capped: bool,
}

/// Search state over a dense local graph (`adj[u]` lists successors of `u`
/// in ascending order).
///
/// Holds the current path, the blocked flags and the B-lists. State touched
/// by one start vertex is cleared lazily before the next search.
#[derive(Debug, Clone)]
pub struct EnumeratorState {
    adj: Vec<Vec<usize>>,
    max_len: usize,
    start: usize,
    stack: Vec<usize>,
    blocked: Vec<bool>,
    on_stack: Vec<bool>,
    blocked_list: Vec<Vec<usize>>,
    touched: Vec<usize>,
    is_touched: Vec<bool>,
    deadline: Option<Instant>,
    steps: u64,
}

impl EnumeratorState {
    pub fn new(adj: Vec<Vec<usize>>, max_len: usize) -> Self {
        let n = adj.len();
        Self {
            adj,
            max_len,
            start: 0,
            stack: Vec::with_capacity(max_len.min(n)),
            blocked: vec![false; n],
            on_stack: vec![false; n],
            blocked_list: vec![Vec::new(); n],
            touched: Vec::new(),
            is_touched: vec![false; n],
            deadline: None,
            steps: 0,
        }
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_blocked(&self, v: usize) -> bool {
        self.blocked[v]
    }

    pub fn blocked_list(&self, v: usize) -> &[usize] {
        &self.blocked_list[v]
    }

    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    fn touch(&mut self, v: usize) {
        if !self.is_touched[v] {
            self.is_touched[v] = true;
            self.touched.push(v);
        }
    }

    fn reset(&mut self) {
        for v in self.touched.drain(..) {
            self.blocked[v] = false;
            self.on_stack[v] = false;
            self.blocked_list[v].clear();
            self.is_touched[v] = false;
        }
        self.stack.clear();
    }

    /// Unblocks `v` and, transitively, every blocked vertex waiting on it
    /// through the B-lists. Each B-list visited is drained. Vertices on the
    /// current path stay blocked.
    pub fn unblock(&mut self, v: usize) {
        self.blocked[v] = false;
        let mut work = vec![v];
        while let Some(u) = work.pop() {
            let waiting = std::mem::take(&mut self.blocked_list[u]);
            for w in waiting {
                if self.blocked[w] && !self.on_stack[w] {
                    self.blocked[w] = false;
                    work.push(w);
                }
            }
        }
    }

    fn enter(&mut self, v: usize) -> Result<Frame, crate::circuits::Truncation> {
        self.stack.push(v);
        self.on_stack[v] = true;
        self.blocked[v] = true;
        self.touch(v);
        self.steps += 1;
        if self.steps.is_multiple_of(1024) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Err(Truncation::TimeBudget);
                }
            }
        }
        Ok(Frame {
            v,
            next: 0,
            found: false,
            capped: false,
        })
    }

    /// Runs the search rooted at `start`, restricted to vertices `>= start`.
    ///
    /// Every circuit through `start` of at most `max_len` vertices is passed
    /// to `sink` as a path beginning at `start`. Returns whether any circuit
    /// was found, or the truncation reason if the sink or the deadline
    /// stopped the search.
    pub fn circuit_search<F>(&mut self, start: usize, sink: &mut F) -> Result<bool, Truncation>
    where
        F: FnMut(&[usize]) -> ControlFlow<Truncation>,
    {
        self.reset();
        self.start = start;
        let mut frames = vec![self.enter(start)?];

        while let Some(top) = frames.last_mut() {
            let v = top.v;
            if self.stack.len() >= self.max_len {
                // at the cap: close circuits, but never extend the path
                for &w in &self.adj[v] {
                    if w == start {
                        if let ControlFlow::Break(t) = sink(&self.stack) {
                            return Err(t);
                        }
                        top.found = true;
                    } else if w > start && !self.blocked[w] {
                        top.capped = true;
                    }
                }
                top.next = self.adj[v].len();
            } else if top.next < self.adj[v].len() {
                let w = self.adj[v][top.next];
                top.next += 1;
                if w == start {
                    if let ControlFlow::Break(t) = sink(&self.stack) {
                        return Err(t);
                    }
                    top.found = true;
                } else if w > start && !self.blocked[w] {
                    let child = self.enter(w)?;
                    frames.push(child);
                }
                continue;
            }

            let done = frames.pop().expect("frame present");
            if done.found || done.capped {
                self.unblock(v);
            } else {
                for i in 0..self.adj[v].len() {
                    let w = self.adj[v][i];
                    if w >= start && !self.blocked_list[w].contains(&v) {
                        self.blocked_list[w].push(v);
                        self.touch(w);
                    }
                }
            }
            self.stack.pop();
            self.on_stack[v] = false;
            match frames.last_mut() {
                Some(parent) => {
                    parent.found |= done.found;
                    parent.capped |= done.capped;
                }
                None => return Ok(done.found),
            }
        }
        unreachable!("the root frame returns")
    }
}

fn local_graph(
    g: &DebtGraph,
    component: &[CompanyId],
) -> Result<(Vec<usize>, Vec<Vec<usize>>), CircuitError> {
    let mut global = component
        .iter()
        .map(|id| g.index_of(id).ok_or_else(|| CircuitError::UnknownVertex(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    global.sort_unstable();
    global.dedup();
    let local: HashMap<usize, usize> = global.iter().enumerate().map(|(l, &v)| (v, l)).collect();
    let adj = global
        .iter()
        .map(|&u| {
            g.out_edges(u)
                .iter()
                .filter_map(|(v, _)| local.get(v).copied())
                .collect()
        })
        .collect();
    Ok((global, adj))
}

/// Streams every elementary circuit of the subgraph induced by `component`
/// with at most `cfg.max_len` vertices, in discovery order.
///
/// Returns the truncation reason when `max_circuits` or the time budget cut
/// the enumeration short.
pub fn enumerate_circuits_with<F>(
    g: &DebtGraph,
    component: &[CompanyId],
    cfg: &EnumerationConfig,
    mut sink: F,
) -> Result<Option<Truncation>, CircuitError>
where
    F: FnMut(Circuit),
{
    cfg.validate()?;
    let (global, adj) = local_graph(g, component)?;
    let deadline = cfg.per_scc_time_budget.map(|b| Instant::now() + b);
    let mut state = EnumeratorState::new(adj, cfg.max_len).with_deadline(deadline);
    let mut emitted = 0usize;
    let mut emit = |path: &[usize]| {
        if cfg.max_circuits.is_some_and(|m| emitted >= m) {
            return ControlFlow::Break(Truncation::MaxCircuits);
        }
        emitted += 1;
        let ids = path.iter().map(|&l| g.id_at(global[l]).clone()).collect();
        sink(Circuit::from_canonical(ids));
        ControlFlow::Continue(())
    };
    for start in 0..global.len() {
        if let Err(t) = state.circuit_search(start, &mut emit) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Collects [`enumerate_circuits_with`] into a lexicographically sorted list.
pub fn enumerate_circuits(
    g: &DebtGraph,
    component: &[CompanyId],
    cfg: &EnumerationConfig,
) -> Result<Enumeration, CircuitError> {
    let mut circuits = Vec::new();
    let truncated = enumerate_circuits_with(g, component, cfg, |c| circuits.push(c))?;
    circuits.sort_unstable();
    Ok(Enumeration {
        circuits,
        truncated,
    })
}

/// Circuits of one component of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCircuits {
    /// Index into [`SccPartition::components`].
    pub scc: usize,
    pub enumeration: Enumeration,
}

/// Enumerates every nontrivial component of `p`, in parallel on the
/// current rayon pool. Output is ordered by component index.
pub fn enumerate_partition(
    g: &DebtGraph,
    p: &SccPartition,
    cfg: &EnumerationConfig,
) -> Result<Vec<ComponentCircuits>, CircuitError> {
    cfg.validate()?;
    crate::scc::nontrivial_indices(p)
        .into_par_iter()
        .map(|scc| {
            enumerate_circuits(g, &p.components()[scc], cfg)
                .map(|enumeration| ComponentCircuits { scc, enumeration })
        })
        .collect()
}
