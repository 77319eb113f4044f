#![allow(dead_code)]

use netting::ledger::{ingest_csv, Amount, Circuit, DebtGraph, IngestMode};
use rand::Rng;

/// Three invoices: A owes B, B owes C, C owes A.
pub const INTRO_CSV: &str = "\
invoice_id,debtor,creditor,amount_minor,issue_date
I1,A,B,32000,2019-03-01
I2,B,C,23000,2019-03-02
I3,C,A,25000,2019-03-03
";

/// Four companies on one circuit; D owes A the smallest amount.
pub const RING4_CSV: &str = "\
invoice_id,debtor,creditor,amount_minor,issue_date
F1,A,B,1500,2019-05-01
F2,B,C,900,2019-05-01
F3,C,D,1200,2019-05-02
F4,D,A,600,2019-05-03
";

/// Circuits ABCD (7000 per edge), ABEFD (200) and BCGH (300) as 13
/// invoices; three of the ten edges are split over two invoices.
pub const OVERLAP_CSV: &str = "\
invoice_id,debtor,creditor,amount_minor,issue_date
N01,A,B,4000,2019-01-10
N02,A,B,3000,2019-02-10
N03,B,C,7000,2019-01-11
N04,C,D,2500,2019-01-12
N05,C,D,4500,2019-03-12
N06,D,A,7000,2019-01-13
N07,B,E,200,2019-01-14
N08,E,F,200,2019-01-15
N09,F,D,150,2019-01-16
N10,F,D,50,2019-04-16
N11,C,G,300,2019-01-17
N12,G,H,300,2019-01-18
N13,H,B,300,2019-01-19
";

pub fn graph_from_csv(csv: &str) -> DebtGraph {
    ingest_csv(csv.as_bytes(), IngestMode::Strict).expect("fixture parses").graph
}

pub fn c(s: &str) -> Circuit {
    Circuit::parse(s).expect("fixture circuit")
}

/// Random simple digraph on `n` vertices `V00..`, each ordered pair present
/// with probability `density`, weights uniform in `1..=max_weight`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, max_weight: Amount) -> DebtGraph {
    let mut b = DebtGraph::builder();
    for i in 0..n {
        b.add_vertex(format!("V{i:02}").parse().unwrap());
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                b.add_edge(
                    format!("V{u:02}").parse().unwrap(),
                    format!("V{v:02}").parse().unwrap(),
                    rng.gen_range(1..=max_weight),
                )
                .unwrap();
            }
        }
    }
    b.build().unwrap()
}
