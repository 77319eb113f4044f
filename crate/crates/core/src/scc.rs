//! Strongly connected components via Tarjan's single-pass DFS.
//!
//! Every circuit of the debt graph lies inside one component, so circuit
//! enumeration runs per component. The DFS keeps its own explicit call
//! stack; graphs with hundreds of thousands of vertices do not touch the
//! machine stack.

use std::collections::HashMap;

use crate::ledger::{CompanyId, DebtGraph};

/// Partition of the vertex set into strongly connected components.
///
/// Each component's vertices are sorted ascending. Components produced by
/// [`tarjan`] appear in the order Tarjan completes them, which is a reverse
/// topological order of the condensation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SccPartition {
    components: Vec<Vec<CompanyId>>,
    component_of: HashMap<CompanyId, usize>,
}

impl SccPartition {
    pub fn from_components(mut components: Vec<Vec<CompanyId>>) -> Self {
        let mut component_of = HashMap::new();
        for (i, comp) in components.iter_mut().enumerate() {
            comp.sort_unstable();
            for v in comp.iter() {
                component_of.insert(v.clone(), i);
            }
        }
        Self {
            components,
            component_of,
        }
    }

    pub fn components(&self) -> &[Vec<CompanyId>] {
        &self.components
    }

    pub fn component_of(&self, id: &CompanyId) -> Option<usize> {
        self.component_of.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components sorted by their smallest vertex; independent of the order
    /// in which an algorithm emitted them.
    pub fn normalized(&self) -> Vec<Vec<CompanyId>> {
        let mut out = self.components.clone();
        out.sort();
        out
    }
}

const UNVISITED: u32 = u32::MAX;

/// Tarjan over vertex indices. Roots are tried in ascending order and
/// successors in ascending order, so the output is deterministic.
pub(crate) fn tarjan_indices(g: &DebtGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut order = vec![UNVISITED; n];
    let mut link = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut components = Vec::new();

    for root in 0..n {
        if order[root] != UNVISITED {
            continue;
        }
        order[root] = counter;
        link[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            let adj = g.out_edges(v);
            if frame.1 < adj.len() {
                let w = adj[frame.1].0;
                frame.1 += 1;
                if order[w] == UNVISITED {
                    order[w] = counter;
                    link[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    link[v] = link[v].min(order[w]);
                }
                continue;
            }

            call.pop();
            if let Some(&(parent, _)) = call.last() {
                link[parent] = link[parent].min(link[v]);
            }
            if link[v] == order[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

/// Exact SCC partition of `g` in O(|V| + |E|).
pub fn tarjan(g: &DebtGraph) -> SccPartition {
    let comps = tarjan_indices(g)
        .into_iter()
        .map(|c| c.into_iter().map(|v| g.id_at(v).clone()).collect())
        .collect();
    SccPartition::from_components(comps)
}

/// Components that can host a circuit: those with at least two vertices.
/// The graph has no self-loops, so singletons never carry one.
pub fn nontrivial_components(p: &SccPartition, g: &DebtGraph) -> Vec<Vec<CompanyId>> {
    debug_assert!(p.components().iter().flatten().all(|v| g.contains(v)));
    p.components()
        .iter()
        .filter(|c| c.len() >= 2)
        .cloned()
        .collect()
}

/// Indices into [`SccPartition::components`] of the nontrivial components.
pub fn nontrivial_indices(p: &SccPartition) -> Vec<usize> {
    (0..p.len()).filter(|&i| p.components()[i].len() >= 2).collect()
}
