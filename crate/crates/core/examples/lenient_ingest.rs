//! Ingesting a messy invoice file: strict mode stops at the first bad
//! record, lenient mode skips bad records and says why.

use netting::ledger::{ingest_csv, IngestMode};

const MESSY: &str = "\
invoice_id,debtor,creditor,amount_minor,issue_date
I1,ACME,GLOBEX,1000,2021-02-01
I2,GLOBEX,INITECH,-5,2021-02-01
I3,INITECH,ACME,seven,2021-02-02
I4,INITECH,INITECH,100,2021-02-02
I1,ACME,GLOBEX,1000,2021-02-03
I5,GLOBEX,INITECH,700,2021-13-40
I6,GLOBEX,INITECH,800,2021-02-04
I7,INITECH,ACME,900,2021-02-05
";

fn main() {
    match ingest_csv(MESSY.as_bytes(), IngestMode::Strict) {
        Ok(_) => println!("strict: accepted everything"),
        Err(e) => println!("strict: {e}"),
    }

    let ingested = ingest_csv(MESSY.as_bytes(), IngestMode::Lenient).expect("lenient ingestion");
    println!("lenient: {} accepted, {} skipped", ingested.accepted, ingested.rejected.len());
    for r in &ingested.rejected {
        println!("  {r}");
    }
    for (d, c, w) in ingested.graph.edges() {
        println!("  {d} -> {c}: {w}");
    }
}
