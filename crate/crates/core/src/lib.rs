//! Multilateral netting of inter-company debts.
//!
//! Invoices aggregate into a directed [`DebtGraph`]; every elementary
//! circuit of that graph is a chain of companies that can cancel part of
//! what they owe each other without moving money. The crate finds those
//! circuits and picks the order in which to settle them:
//!
//! 1. [`ledger`] ingests invoices and owns the graph and the settle rule;
//! 2. [`scc`] splits the graph into strongly connected components;
//! 3. [`circuits`] enumerates bounded-length circuits inside each one;
//! 4. [`settlement`] orders the circuits to maximize the netted amount;
//! 5. [`pipeline`] and [`cli`] run the phases as a file-based batch job.
//!
//! [`oracle`] holds brute-force references used by the test suite, and
//! [`datagen`] produces seeded synthetic invoice files.
//!
//! ```
//! use netting::{DebtGraph, Circuit};
//!
//! let mut g = DebtGraph::from_edges(&[("A", "B", 32_000), ("B", "C", 23_000), ("C", "A", 25_000)])?;
//! let x = g.settle(&Circuit::parse("A,B,C")?)?;
//! assert_eq!(x, 23_000);
//! assert_eq!(g.weight(&"A".parse()?, &"B".parse()?), Some(9_000));
//! # Ok::<(), netting::LedgerError>(())
//! ```

pub mod circuits;
pub mod cli;
pub mod datagen;
pub mod ledger;
pub mod oracle;
pub mod pipeline;
pub mod scc;
pub mod settlement;

pub use circuits::{enumerate_circuits, EnumerationConfig, Truncation};
pub use ledger::{Amount, Circuit, CompanyId, DebtGraph, IngestMode, LedgerError};
pub use pipeline::{run_pipeline, PipelineConfig, RunReport};
pub use scc::{tarjan, SccPartition};
pub use settlement::{optimize_order, OptimizerConfig, OptimizerMode, SettlementPlan};
