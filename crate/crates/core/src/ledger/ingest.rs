use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Amount, CompanyId, DebtGraph, GraphBuilder, Invoice, LedgerError};

/// Required header row of the invoice CSV format.
pub const CSV_HEADER: [&str; 5] = ["invoice_id", "debtor", "creditor", "amount_minor", "issue_date"];

/// What to do with a malformed record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestMode {
    /// Abort on the first malformed record.
    #[default]
    Strict,
    /// Skip malformed records and report them.
    Lenient,
}

/// Why a single invoice record was refused.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum RecordError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("unexpected extra fields ({0} fields)")]
    ExtraFields(usize),
    #[error("amount `{0}` is not an integer")]
    InvalidAmount(String),
    #[error("amount `{0}` is not positive")]
    NonPositiveAmount(String),
    #[error("amount overflows the supported range")]
    AmountOverflow,
    #[error("issue date `{0}` is not an ISO-8601 calendar date")]
    InvalidDate(String),
    #[error("debtor and creditor are both {0}")]
    SelfInvoice(CompanyId),
    #[error("duplicate invoice id `{0}`")]
    DuplicateInvoiceId(String),
    #[error("malformed record: {0}")]
    Malformed(String),
}

/// Position of a record in the input stream. `record` counts data records
/// from 1; `line` is the physical line when the input was a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locator {
    pub record: usize,
    pub line: Option<u64>,
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line} (record {})", self.record),
            None => write!(f, "record {}", self.record),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub locator: Locator,
    pub invoice_id: Option<String>,
    pub reason: RecordError,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.locator)?;
        if let Some(id) = &self.invoice_id {
            write!(f, " invoice `{id}`")?;
        }
        write!(f, ": {}", self.reason)
    }
}

/// Result of an ingestion run.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub graph: DebtGraph,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

/// Incremental invoice ingestion with duplicate detection.
#[derive(Debug)]
pub struct Ingestor {
    mode: IngestMode,
    seen: HashSet<String>,
    builder: GraphBuilder,
    records: usize,
    accepted: usize,
    rejected: Vec<Rejection>,
}

impl Ingestor {
    pub fn new(mode: IngestMode) -> Self {
        Self {
            mode,
            seen: HashSet::new(),
            builder: GraphBuilder::new(),
            records: 0,
            accepted: 0,
            rejected: Vec::new(),
        }
    }

    /// Number of records seen so far, accepted or not.
    pub fn records(&self) -> usize {
        self.records
    }

    /// Adds a parsed (or failed) record. In strict mode a failure aborts with
    /// [`LedgerError::Rejected`]; in lenient mode it is recorded and skipped.
    pub fn push(
        &mut self,
        line: Option<u64>,
        invoice_id: Option<&str>,
        record: Result<Invoice, RecordError>,
    ) -> Result<(), LedgerError> {
        self.records += 1;
        let locator = Locator {
            record: self.records,
            line,
        };
        let outcome = record.and_then(|inv| self.accept(inv));
        match outcome {
            Ok(()) => {
                self.accepted += 1;
                Ok(())
            }
            Err(reason) => match self.mode {
                IngestMode::Strict => Err(LedgerError::Rejected { locator, reason }),
                IngestMode::Lenient => {
                    self.rejected.push(Rejection {
                        locator,
                        invoice_id: invoice_id.map(str::to_owned),
                        reason,
                    });
                    Ok(())
                }
            },
        }
    }

    pub fn push_invoice(&mut self, invoice: Invoice) -> Result<(), LedgerError> {
        let id = invoice.invoice_id().to_owned();
        self.push(None, Some(&id), Ok(invoice))
    }

    fn accept(&mut self, inv: Invoice) -> Result<(), RecordError> {
        if self.seen.contains(&inv.invoice_id) {
            return Err(RecordError::DuplicateInvoiceId(inv.invoice_id));
        }
        self.builder
            .add_edge(inv.debtor, inv.creditor, inv.amount)
            .map_err(|e| match e {
                LedgerError::SelfLoop(c) => RecordError::SelfInvoice(c),
                LedgerError::Overflow => RecordError::AmountOverflow,
                other => RecordError::Malformed(other.to_string()),
            })?;
        self.seen.insert(inv.invoice_id);
        Ok(())
    }

    pub fn finish(self) -> Result<Ingested, LedgerError> {
        Ok(Ingested {
            graph: self.builder.build()?,
            accepted: self.accepted,
            rejected: self.rejected,
        })
    }
}

/// Aggregates a stream of invoices into a debt graph.
pub fn ingest<I>(records: I, mode: IngestMode) -> Result<Ingested, LedgerError>
where
    I: IntoIterator<Item = Invoice>,
{
    let mut ingestor = Ingestor::new(mode);
    for inv in records {
        ingestor.push_invoice(inv)?;
    }
    ingestor.finish()
}

fn field(rec: &csv::StringRecord, i: usize) -> Result<&str, RecordError> {
    match rec.get(i) {
        Some(s) if !s.is_empty() => Ok(s),
        _ => Err(RecordError::MissingField(CSV_HEADER[i])),
    }
}

fn parse_record(rec: &csv::StringRecord) -> Result<Invoice, RecordError> {
    if rec.len() > CSV_HEADER.len() {
        return Err(RecordError::ExtraFields(rec.len()));
    }
    let invoice_id = field(rec, 0)?;
    let debtor = CompanyId::new(field(rec, 1)?).map_err(|_| RecordError::MissingField("debtor"))?;
    let creditor =
        CompanyId::new(field(rec, 2)?).map_err(|_| RecordError::MissingField("creditor"))?;
    let raw_amount = field(rec, 3)?;
    let amount: i128 = raw_amount
        .parse()
        .map_err(|_| RecordError::InvalidAmount(raw_amount.to_owned()))?;
    if amount <= 0 {
        return Err(RecordError::NonPositiveAmount(raw_amount.to_owned()));
    }
    let amount = Amount::try_from(amount).map_err(|_| RecordError::AmountOverflow)?;
    let raw_date = field(rec, 4)?;
    let issue_date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
        .map_err(|_| RecordError::InvalidDate(raw_date.to_owned()))?;
    Invoice::new(invoice_id, debtor, creditor, amount, issue_date)
}

/// Reads the invoice CSV format (`invoice_id,debtor,creditor,amount_minor,
/// issue_date`, header required) and aggregates it into a debt graph.
pub fn ingest_csv<R: Read>(reader: R, mode: IngestMode) -> Result<Ingested, LedgerError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(LedgerError::Header {
            expected: CSV_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut ingestor = Ingestor::new(mode);
    let mut rec = csv::StringRecord::new();
    loop {
        let line = rdr.position().line() + 1;
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let line = rec.position().map_or(line, |p| p.line());
                let parsed = parse_record(&rec);
                ingestor.push(Some(line), rec.get(0).filter(|s| !s.is_empty()), parsed)?;
            }
            Err(e) => {
                if !matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) {
                    return Err(e.into());
                }
                ingestor.push(Some(line), None, Err(RecordError::Malformed(e.to_string())))?;
            }
        }
    }
    ingestor.finish()
}
