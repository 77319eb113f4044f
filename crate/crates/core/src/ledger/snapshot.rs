use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Amount, CompanyId, DebtGraph, GraphBuilder, LedgerError};

/// Serialized form of a [`DebtGraph`]: vertices sorted, edges sorted by
/// `(debtor, creditor)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub vertices: Vec<CompanyId>,
    pub edges: Vec<SnapshotEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub debtor: CompanyId,
    pub creditor: CompanyId,
    pub amount: Amount,
}

impl From<&DebtGraph> for GraphSnapshot {
    fn from(g: &DebtGraph) -> Self {
        Self {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .map(|(d, c, w)| SnapshotEdge {
                    debtor: d.clone(),
                    creditor: c.clone(),
                    amount: w,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphSnapshot> for DebtGraph {
    type Error = LedgerError;

    fn try_from(s: GraphSnapshot) -> Result<Self, Self::Error> {
        let mut b = GraphBuilder::new();
        for v in s.vertices {
            b.add_vertex(v);
        }
        for e in s.edges {
            b.add_edge(e.debtor, e.creditor, e.amount)?;
        }
        b.build()
    }
}

impl DebtGraph {
    pub fn to_snapshot(&self) -> GraphSnapshot {
        GraphSnapshot::from(self)
    }

    /// Writes the deterministic JSON snapshot, newline terminated.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), LedgerError> {
        serde_json::to_writer_pretty(&mut w, &self.to_snapshot())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, LedgerError> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    pub fn from_json(s: &str) -> Result<Self, LedgerError> {
        let snap: GraphSnapshot = serde_json::from_str(s)?;
        snap.try_into()
    }
}
