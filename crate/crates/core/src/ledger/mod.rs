//! Invoice ledger and the aggregated debt graph.
//!
//! A [`DebtGraph`] holds one weighted edge per ordered pair of companies:
//! edge `(u, v)` with weight `w` means `u` owes `v` the amount `w`, summed
//! over every invoice where `u` is the debtor and `v` the creditor.
//! Amounts are exact integers in minor currency units.
//!
//! Settling a [`Circuit`] subtracts its smallest edge weight from every edge
//! of the circuit. Edges that reach zero are removed from the graph, so the
//! later stages never see dead edges.

mod ingest;
mod snapshot;

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::{
    ingest, ingest_csv, Ingested, IngestMode, Ingestor, Locator, RecordError, Rejection,
    CSV_HEADER,
};
pub use snapshot::{GraphSnapshot, SnapshotEdge};

/// Money in minor currency units (e.g. bani, cents).
pub type Amount = u64;

/// Errors raised by the ledger: ingestion failures, invalid graph
/// construction and settlement of circuits that no longer exist.
#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("company identifier must not be empty")]
    EmptyCompanyId,

    #[error("self-obligation for company {0} is not allowed")]
    SelfLoop(CompanyId),

    #[error("edge {debtor} -> {creditor} must carry a positive amount")]
    ZeroAmount {
        debtor: CompanyId,
        creditor: CompanyId,
    },

    #[error("total obligations overflow the amount range")]
    Overflow,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("circuit {circuit} is stale: edge {debtor} -> {creditor} is absent")]
    StaleCircuit {
        circuit: Circuit,
        debtor: CompanyId,
        creditor: CompanyId,
    },

    #[error("density is undefined for a graph with {vertices} vertices")]
    UndefinedDensity { vertices: usize },

    #[error("invoice rejected at {locator}: {reason}")]
    Rejected { locator: Locator, reason: RecordError },

    #[error("bad CSV header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Opaque, non-empty company identifier. Ordering is byte-wise on the
/// underlying string and drives every canonical ordering in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CompanyId(String);

impl CompanyId {
    pub fn new(id: impl Into<String>) -> Result<Self, LedgerError> {
        let id = id.into();
        if id.is_empty() {
            return Err(LedgerError::EmptyCompanyId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for CompanyId {
    type Error = LedgerError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl std::str::FromStr for CompanyId {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl From<CompanyId> for String {
    fn from(value: CompanyId) -> Self {
        value.0
    }
}

impl fmt::Display for CompanyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One validated payment obligation record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invoice {
    invoice_id: String,
    debtor: CompanyId,
    creditor: CompanyId,
    amount: Amount,
    issue_date: chrono::NaiveDate,
}

impl Invoice {
    pub fn new(
        invoice_id: impl Into<String>,
        debtor: CompanyId,
        creditor: CompanyId,
        amount: Amount,
        issue_date: chrono::NaiveDate,
    ) -> Result<Self, RecordError> {
        let invoice_id = invoice_id.into();
        if invoice_id.is_empty() {
            return Err(RecordError::MissingField("invoice_id"));
        }
        if amount == 0 {
            return Err(RecordError::NonPositiveAmount("0".into()));
        }
        if debtor == creditor {
            return Err(RecordError::SelfInvoice(debtor));
        }
        Ok(Self {
            invoice_id,
            debtor,
            creditor,
            amount,
            issue_date,
        })
    }

    pub fn invoice_id(&self) -> &str {
        &self.invoice_id
    }

    pub fn debtor(&self) -> &CompanyId {
        &self.debtor
    }

    pub fn creditor(&self) -> &CompanyId {
        &self.creditor
    }

    pub fn amount(&self) -> Amount {
        self.amount
    }

    pub fn issue_date(&self) -> chrono::NaiveDate {
        self.issue_date
    }
}

/// An elementary directed cycle `v1 -> v2 -> ... -> vk -> v1`, stored in
/// canonical rotation (the smallest identifier first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<CompanyId>", into = "Vec<CompanyId>")]
pub struct Circuit(Vec<CompanyId>);

impl Circuit {
    /// Builds a circuit from its vertex sequence, rotating it into canonical
    /// form. Fails on fewer than two vertices or a repeated vertex.
    pub fn new(mut vertices: Vec<CompanyId>) -> Result<Self, LedgerError> {
        if vertices.len() < 2 {
            return Err(LedgerError::InvalidCircuit(format!(
                "a circuit needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        let mut seen: Vec<&CompanyId> = vertices.iter().collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(LedgerError::InvalidCircuit(format!(
                "vertex {} repeats",
                w[0]
            )));
        }
        let start = vertices
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        vertices.rotate_left(start);
        Ok(Self(vertices))
    }

    /// Wraps a vertex list already known to be elementary and canonical.
    pub(crate) fn from_canonical(vertices: Vec<CompanyId>) -> Self {
        debug_assert!(vertices.len() >= 2 && vertices.iter().skip(1).all(|v| *v > vertices[0]));
        Self(vertices)
    }

    /// Convenience constructor from string identifiers.
    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self, LedgerError> {
        let vertices = ids
            .iter()
            .map(|s| CompanyId::new(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(vertices)
    }

    /// Parses the comma-separated line format used by the circuit listings.
    pub fn parse(line: &str) -> Result<Self, LedgerError> {
        let ids: Vec<&str> = line.split(',').map(str::trim).collect();
        Self::from_ids(&ids)
    }

    pub fn vertices(&self) -> &[CompanyId] {
        &self.0
    }

    /// Number of vertices, which equals the number of edges.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `k` edges of the circuit, closing edge last.
    pub fn edges(&self) -> impl Iterator<Item = (&CompanyId, &CompanyId)> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| (&self.0[i], &self.0[(i + 1) % k]))
    }
}

impl TryFrom<Vec<CompanyId>> for Circuit {
    type Error = LedgerError;

    fn try_from(value: Vec<CompanyId>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Circuit> for Vec<CompanyId> {
    fn from(value: Circuit) -> Self {
        value.0
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(v.as_str())?;
        }
        Ok(())
    }
}

/// Accumulates vertices and weighted edges, summing parallel edges.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<CompanyId>,
    edges: HashMap<(CompanyId, CompanyId), Amount>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: CompanyId) -> &mut Self {
        self.vertices.push(id);
        self
    }

    /// Adds `amount` to the edge `debtor -> creditor`.
    pub fn add_edge(
        &mut self,
        debtor: CompanyId,
        creditor: CompanyId,
        amount: Amount,
    ) -> Result<&mut Self, LedgerError> {
        if debtor == creditor {
            return Err(LedgerError::SelfLoop(debtor));
        }
        if amount == 0 {
            return Err(LedgerError::ZeroAmount { debtor, creditor });
        }
        let key = (debtor, creditor);
        let sum = self
            .edges
            .get(&key)
            .map_or(Some(amount), |w| w.checked_add(amount))
            .ok_or(LedgerError::Overflow)?;
        self.vertices.push(key.0.clone());
        self.vertices.push(key.1.clone());
        self.edges.insert(key, sum);
        Ok(self)
    }

    pub fn build(mut self) -> Result<DebtGraph, LedgerError> {
        self.vertices.sort_unstable();
        self.vertices.dedup();
        let index: HashMap<CompanyId, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let mut out: Vec<Vec<(usize, Amount)>> = vec![Vec::new(); self.vertices.len()];
        let mut total: Amount = 0;
        for ((d, c), w) in self.edges {
            total = total.checked_add(w).ok_or(LedgerError::Overflow)?;
            out[index[&d]].push((index[&c], w));
        }
        let edge_count = out.iter().map(Vec::len).sum();
        for adj in &mut out {
            adj.sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(DebtGraph {
            ids: self.vertices,
            index,
            out,
            edge_count,
        })
    }
}

/// Weighted directed simple graph of aggregated obligations.
///
/// Vertices are stored in ascending identifier order, so a vertex index
/// comparison is an identifier comparison. The vertex set is fixed after
/// construction; settlement only lowers or removes edges. The sum of all
/// edge weights is guaranteed to fit in [`Amount`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DebtGraph {
    ids: Vec<CompanyId>,
    index: HashMap<CompanyId, usize>,
    out: Vec<Vec<(usize, Amount)>>,
    edge_count: usize,
}

impl DebtGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Builds a graph from `(debtor, creditor, amount)` triples given as
    /// string identifiers. Mostly useful for fixtures.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, Amount)]) -> Result<Self, LedgerError> {
        let mut b = GraphBuilder::new();
        for (d, c, w) in edges {
            b.add_edge(CompanyId::new(d.as_ref())?, CompanyId::new(c.as_ref())?, *w)?;
        }
        b.build()
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertices in ascending identifier order.
    pub fn vertices(&self) -> &[CompanyId] {
        &self.ids
    }

    pub fn contains(&self, id: &CompanyId) -> bool {
        self.index.contains_key(id)
    }

    pub fn index_of(&self, id: &CompanyId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id_at(&self, ix: usize) -> &CompanyId {
        &self.ids[ix]
    }

    /// Successor indices of vertex `ix` with edge weights, ascending.
    pub fn out_edges(&self, ix: usize) -> &[(usize, Amount)] {
        &self.out[ix]
    }

    /// All edges sorted by `(debtor, creditor)`.
    pub fn edges(&self) -> impl Iterator<Item = (&CompanyId, &CompanyId, Amount)> + '_ {
        self.out.iter().enumerate().flat_map(move |(u, adj)| {
            adj.iter()
                .map(move |&(v, w)| (&self.ids[u], &self.ids[v], w))
        })
    }

    pub(crate) fn weight_ix(&self, u: usize, v: usize) -> Option<Amount> {
        let adj = &self.out[u];
        adj.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| adj[i].1)
    }

    /// Weight of `debtor -> creditor`, `None` when the edge is absent.
    pub fn weight(&self, debtor: &CompanyId, creditor: &CompanyId) -> Option<Amount> {
        let u = self.index_of(debtor)?;
        let v = self.index_of(creditor)?;
        self.weight_ix(u, v)
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> Amount {
        self.out.iter().flatten().map(|&(_, w)| w).sum()
    }

    /// `|E| / (|V| (|V| - 1))` as an exact ratio.
    pub fn density(&self) -> Result<Ratio<u64>, LedgerError> {
        let n = self.ids.len() as u64;
        if n < 2 {
            return Err(LedgerError::UndefinedDensity {
                vertices: self.ids.len(),
            });
        }
        Ok(Ratio::new(self.edge_count as u64, n * (n - 1)))
    }

    fn resolve(&self, c: &Circuit) -> Result<Vec<(usize, usize)>, LedgerError> {
        c.edges()
            .map(|(d, k)| {
                let stale = || LedgerError::StaleCircuit {
                    circuit: c.clone(),
                    debtor: d.clone(),
                    creditor: k.clone(),
                };
                let u = self.index_of(d).ok_or_else(stale)?;
                let v = self.index_of(k).ok_or_else(stale)?;
                self.weight_ix(u, v).ok_or_else(stale)?;
                Ok((u, v))
            })
            .collect()
    }

    /// Smallest edge weight along `c`, or 0 when any edge is absent.
    pub fn circuit_value(&self, c: &Circuit) -> Amount {
        let mut min = Amount::MAX;
        for (d, k) in c.edges() {
            match self.weight(d, k) {
                Some(w) => min = min.min(w),
                None => return 0,
            }
        }
        if c.is_empty() {
            0
        } else {
            min
        }
    }

    /// Settles `c`: subtracts its smallest edge weight `x` from every edge of
    /// the circuit, drops edges that reach zero and returns `x`. The graph is
    /// left untouched when an edge of `c` is missing.
    pub fn settle(&mut self, c: &Circuit) -> Result<Amount, LedgerError> {
        let edges = self.resolve(c)?;
        let x = edges
            .iter()
            .filter_map(|&(u, v)| self.weight_ix(u, v))
            .min()
            .unwrap_or(0);
        for &(u, v) in &edges {
            self.decrease_ix(u, v, x);
        }
        Ok(x)
    }

    pub(crate) fn decrease_ix(&mut self, u: usize, v: usize, x: Amount) {
        let adj = &mut self.out[u];
        if let Ok(i) = adj.binary_search_by_key(&v, |&(t, _)| t) {
            debug_assert!(adj[i].1 >= x);
            adj[i].1 -= x;
            if adj[i].1 == 0 {
                adj.remove(i);
                self.edge_count -= 1;
            }
        }
    }
}
