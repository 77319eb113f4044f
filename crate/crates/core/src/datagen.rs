//! Seeded synthetic invoice data.
//!
//! Produces an invoice CSV whose aggregated graph has exactly the requested
//! number of companies and distinct debt edges. Every company sits on at
//! least one edge (a random perfect matching is laid down first); the
//! remaining edges are uniform random ordered pairs. Edge weights are
//! log-uniform, and some edges are split across two invoices so ingestion
//! has something to aggregate. Output is byte-identical for a fixed seed.

use std::collections::HashSet;
use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{Amount, CSV_HEADER};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WeightDistribution {
    /// `exp(U(ln min, ln(max + 1)))`, floored and clamped to `[min, max]`.
    LogUniform { min: Amount, max: Amount },
}

impl Default for WeightDistribution {
    fn default() -> Self {
        WeightDistribution::LogUniform {
            min: 100,
            max: 1_000_000_000,
        }
    }
}

impl WeightDistribution {
    fn sample<R: Rng>(&self, rng: &mut R) -> Amount {
        match *self {
            WeightDistribution::LogUniform { min, max } => {
                let lo = (min as f64).ln();
                let hi = (max as f64 + 1.0).ln();
                let w = rng.gen_range(lo..hi).exp().floor() as Amount;
                w.clamp(min, max)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub companies: usize,
    pub edges: usize,
    pub seed: u64,
    pub weights: WeightDistribution,
}

impl SyntheticConfig {
    pub fn new(companies: usize, edges: usize, seed: u64) -> Self {
        Self {
            companies,
            edges,
            seed,
            weights: WeightDistribution::default(),
        }
    }

    fn validate(&self) -> Result<(), DatagenError> {
        let n = self.companies;
        if n < 2 {
            return Err(DatagenError::Infeasible(format!(
                "need at least 2 companies, got {n}"
            )));
        }
        let pairs = n as u128 * (n as u128 - 1);
        if self.edges as u128 > pairs {
            return Err(DatagenError::Infeasible(format!(
                "{} edges exceed the {pairs} ordered pairs of {n} companies",
                self.edges
            )));
        }
        if 2 * self.edges < n {
            return Err(DatagenError::Infeasible(format!(
                "{} edges cannot touch all {n} companies",
                self.edges
            )));
        }
        let WeightDistribution::LogUniform { min, max } = self.weights;
        if min == 0 || min > max {
            return Err(DatagenError::Infeasible(format!(
                "weight range [{min}, {max}] must be positive and non-empty"
            )));
        }
        Ok(())
    }
}

fn company_name(i: usize, width: usize) -> String {
    format!("C{i:0width$}")
}

fn pick_edges(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let n = cfg.companies;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = perm.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[1])).collect();
    if n % 2 == 1 {
        edges.push((perm[n - 1], perm[0]));
    }
    let mut seen: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let pairs = n * (n - 1);
    if pairs <= 4 * cfg.edges {
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .filter(|p| !seen.contains(p))
            .collect();
        rest.shuffle(rng);
        let need = cfg.edges - edges.len();
        edges.extend(rest.into_iter().take(need));
    } else {
        while edges.len() < cfg.edges {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            if seen.insert((u, v)) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Writes the invoice CSV for `cfg` and returns the number of invoices.
pub fn generate_synthetic<W: Write>(cfg: &SyntheticConfig, out: W) -> Result<usize, DatagenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let edges = pick_edges(cfg, &mut rng);

    let mut rows: Vec<(usize, usize, Amount)> = Vec::with_capacity(edges.len() * 2);
    for (u, v) in edges {
        let w = cfg.weights.sample(&mut rng);
        if w >= 2 && rng.gen_bool(0.25) {
            let a = rng.gen_range(1..w);
            rows.push((u, v, a));
            rows.push((u, v, w - a));
        } else {
            rows.push((u, v, w));
        }
    }
    rows.shuffle(&mut rng);

    let width = (cfg.companies - 1).to_string().len();
    let id_width = rows.len().to_string().len();
    let base = NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date");
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(CSV_HEADER)?;
    for (i, (u, v, a)) in rows.iter().enumerate() {
        let date = base + Days::new(rng.gen_range(0..365));
        wtr.write_record([
            format!("INV{:0id_width$}", i + 1),
            company_name(*u, width),
            company_name(*v, width),
            a.to_string(),
            date.format("%Y-%m-%d").to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(rows.len())
}

pub fn generate_synthetic_string(cfg: &SyntheticConfig) -> Result<String, DatagenError> {
    let mut buf = Vec::new();
    generate_synthetic(cfg, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV writer emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{ingest_csv, IngestMode};

    fn graph(cfg: &SyntheticConfig) -> crate::ledger::DebtGraph {
        let csv = generate_synthetic_string(cfg).unwrap();
        ingest_csv(csv.as_bytes(), IngestMode::Strict).unwrap().graph
    }

    #[test]
    fn two_companies_two_edges_is_antiparallel_pair() {
        let g = graph(&SyntheticConfig::new(2, 2, 7));
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn exact_counts_sparse_and_dense() {
        for (n, e) in [(101, 300), (7, 42), (9, 5), (50, 2000)] {
            let g = graph(&SyntheticConfig::new(n, e, 1));
            assert_eq!((g.vertex_count(), g.edge_count()), (n, e), "n={n} e={e}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SyntheticConfig::new(300, 1000, 42);
        assert_eq!(
            generate_synthetic_string(&cfg).unwrap(),
            generate_synthetic_string(&cfg).unwrap()
        );
        let other = SyntheticConfig::new(300, 1000, 43);
        assert_ne!(
            generate_synthetic_string(&cfg).unwrap(),
            generate_synthetic_string(&other).unwrap()
        );
    }

    #[test]
    fn weights_stay_in_range() {
        let mut cfg = SyntheticConfig::new(200, 600, 3);
        cfg.weights = WeightDistribution::LogUniform { min: 100, max: 1000 };
        let g = graph(&cfg);
        assert!(g.edges().all(|(_, _, w)| (100..=1000).contains(&w)));
    }

    #[test]
    fn infeasible_requests() {
        for (n, e) in [(1, 0), (3, 7), (10, 4)] {
            assert!(matches!(
                generate_synthetic_string(&SyntheticConfig::new(n, e, 0)),
                Err(DatagenError::Infeasible(_))
            ));
        }
    }
}
