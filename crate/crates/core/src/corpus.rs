//! Tables, CSV ingestion and the table-quality filters.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cell encodings treated as missing values.
pub const NAN_TOKENS: [&str; 6] = ["", "NaN", "nan", "NA", "null", "NULL"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty input: no header row")]
    EmptyTable,
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid filter criteria: {0}")]
    InvalidCriteria(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parsed table: ordered headers over a row-major grid of optional cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    headers: Vec<String>,
    cells: Vec<Vec<Option<String>>>,
}

impl Table {
    /// Builds a table, rejecting rows whose width differs from the header.
    pub fn new(
        id: impl Into<String>,
        headers: Vec<String>,
        cells: Vec<Vec<Option<String>>>,
    ) -> Result<Self, CorpusError> {
        let width = headers.len();
        if let Some((i, row)) = cells.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(CorpusError::RaggedRow {
                row: i + 1,
                expected: width,
                found: row.len(),
            });
        }
        Ok(Self {
            id: id.into(),
            name: None,
            category: None,
            description: None,
            headers,
            cells,
        })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.cells
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.headers.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&str> {
        self.cells.get(row)?.get(col)?.as_deref()
    }

    /// Values of one column in row order.
    pub fn column(&self, col: usize) -> impl Iterator<Item = Option<&str>> + '_ {
        self.cells.iter().map(move |r| r[col].as_deref())
    }

    pub fn nan_fraction(&self) -> f64 {
        let total = self.n_rows() * self.n_cols();
        if total == 0 {
            return 0.0;
        }
        let missing = self.cells.iter().flatten().filter(|c| c.is_none()).count();
        missing as f64 / total as f64
    }

    /// `1 - distinct/n_cols`, compared case-sensitively.
    pub fn duplicate_header_fraction(&self) -> f64 {
        if self.headers.is_empty() {
            return 0.0;
        }
        let distinct: HashSet<&str> = self.headers.iter().map(String::as_str).collect();
        1.0 - distinct.len() as f64 / self.n_cols() as f64
    }

    /// Keeps the first `max_rows` rows.
    pub fn truncated(mut self, max_rows: usize) -> Self {
        self.cells.truncate(max_rows);
        self
    }

    /// Writes the table back out as CSV, missing cells as empty fields.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), CorpusError> {
        let mut out = csv::Writer::from_writer(writer);
        let map = |e: csv::Error| CorpusError::Io(std::io::Error::other(e));
        out.write_record(&self.headers).map_err(map)?;
        for row in &self.cells {
            out.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))
                .map_err(map)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn is_nan_token(raw: &str) -> bool {
    NAN_TOKENS.contains(&raw.trim())
}

/// Parses delimiter-separated text with a mandatory header row.
pub fn ingest_csv<R: Read>(source: R, id: &str) -> Result<Table, CorpusError> {
    ingest_delimited(source, id, b',')
}

pub fn ingest_delimited<R: Read>(source: R, id: &str, delimiter: u8) -> Result<Table, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut records = reader.records();
    let headers: Vec<String> = match records.next() {
        None => return Err(CorpusError::EmptyTable),
        Some(rec) => rec
            .map_err(|e| CorpusError::Parse {
                row: 0,
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').to_string())
            .collect(),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CorpusError::EmptyTable);
    }

    let mut cells = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CorpusError::Parse {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(CorpusError::RaggedRow {
                row,
                expected: headers.len(),
                found: rec.len(),
            });
        }
        cells.push(
            rec.iter()
                .map(|c| (!is_nan_token(c)).then(|| c.to_string()))
                .collect(),
        );
    }
    Table::new(id, headers, cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterCriteria {
    pub min_rows: usize,
    pub min_cols: usize,
    pub max_nan_fraction: f64,
    pub max_duplicate_name_fraction: f64,
    pub max_rows_retained: usize,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        Self {
            min_rows: 5,
            min_cols: 5,
            max_nan_fraction: 0.5,
            max_duplicate_name_fraction: 0.5,
            max_rows_retained: 1000,
        }
    }
}

impl FilterCriteria {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let ratio_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !ratio_ok(self.max_nan_fraction) || !ratio_ok(self.max_duplicate_name_fraction) {
            return Err(CorpusError::InvalidCriteria(
                "fractions must lie in [0, 1]".into(),
            ));
        }
        if self.min_rows == 0 || self.min_cols == 0 || self.max_rows_retained == 0 {
            return Err(CorpusError::InvalidCriteria("counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// First criterion a rejected table failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    TooFewRows,
    TooFewColumns,
    NanFraction,
    DuplicateNames,
    DuplicateId,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::TooFewRows => "too few rows",
            RejectReason::TooFewColumns => "too few columns",
            RejectReason::NanFraction => "NaN fraction",
            RejectReason::DuplicateNames => "duplicate column names",
            RejectReason::DuplicateId => "duplicate table id",
        })
    }
}

#[derive(Debug, Default)]
pub struct FilterOutcome {
    pub kept: Vec<Table>,
    pub rejected: Vec<(String, RejectReason)>,
    /// One entry per input table, in input order.
    pub manifest: Vec<ManifestEntry>,
}

/// Checks one table, already truncated to the retained row budget.
pub fn check_table(table: &Table, criteria: &FilterCriteria) -> Option<RejectReason> {
    if table.n_rows() < criteria.min_rows {
        Some(RejectReason::TooFewRows)
    } else if table.n_cols() < criteria.min_cols {
        Some(RejectReason::TooFewColumns)
    } else if table.nan_fraction() > criteria.max_nan_fraction {
        Some(RejectReason::NanFraction)
    } else if table.duplicate_header_fraction() > criteria.max_duplicate_name_fraction {
        Some(RejectReason::DuplicateNames)
    } else {
        None
    }
}

/// Splits tables into kept and rejected.
///
/// Tables are truncated to `max_rows_retained` before the checks run, so
/// filtering the kept set a second time is a no-op. A table whose id was
/// already seen is rejected as a duplicate.
pub fn filter_tables<I>(tables: I, criteria: &FilterCriteria) -> FilterOutcome
where
    I: IntoIterator<Item = Table>,
{
    let mut seen = HashSet::new();
    let mut out = FilterOutcome::default();
    for table in tables {
        let reason = if seen.insert(table.id.clone()) {
            None
        } else {
            Some(RejectReason::DuplicateId)
        };
        let table = table.truncated(criteria.max_rows_retained);
        let reason = reason.or_else(|| check_table(&table, criteria));
        out.manifest.push(ManifestEntry {
            id: table.id.clone(),
            n_rows: table.n_rows(),
            n_cols: table.n_cols(),
            kept: reason.is_none(),
            reason: reason.map(|r| r.to_string()),
        });
        match reason {
            Some(reason) => out.rejected.push((table.id, reason)),
            None => out.kept.push(table),
        }
    }
    out
}

/// One line of the corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub kept: bool,
    pub reason: Option<String>,
}
