//! CSV ingestion of dated prices and returns.
//!
//! Both formats need a header row (`date,price` or `date,return`) and ISO
//! dates (`YYYY-MM-DD`) in strictly increasing order. Values are parsed with
//! correct rounding, so a return written as `0.01` becomes the double
//! nearest to 0.01 and nothing else; no unit conversion is applied.

use chrono::NaiveDate;
use csv::{ReaderBuilder, Trim};

use crate::error::IngestError;

/// Dated one-period returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

struct Row {
    line: u64,
    date: NaiveDate,
    value: f64,
}

fn malformed(line: u64, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedCsv {
        line,
        reason: reason.into(),
    }
}

fn read_rows(text: &str, value_column: &str) -> Result<Vec<Row>, IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if header.iter().ne(["date", value_column]) {
        return Err(malformed(1, format!("expected header `date,{value_column}`")));
    }

    let mut rows: Vec<Row> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| malformed(line, format!("bad date `{}`: {e}", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| malformed(line, format!("bad number `{}`", &record[1])))?;
        if !value.is_finite() {
            return Err(malformed(line, format!("non-finite value `{}`", &record[1])));
        }
        if let Some(prev) = rows.last() {
            if date <= prev.date {
                return Err(IngestError::NonMonotoneDates {
                    line,
                    date: record[0].to_string(),
                });
            }
        }
        rows.push(Row { line, date, value });
    }
    Ok(rows)
}

/// Reads `date,price` rows and converts them to returns `S_t / S_(t-1) - 1`,
/// each dated at `t`.
pub fn ingest_prices(csv_text: &str) -> Result<ReturnSeries, IngestError> {
    let rows = read_rows(csv_text, "price")?;
    if let Some(bad) = rows.iter().find(|r| r.value <= 0.0) {
        return Err(IngestError::NonPositivePrice {
            line: bad.line,
            value: bad.value,
        });
    }
    if rows.len() < 2 {
        return Err(IngestError::TooFewRows {
            needed: 2,
            found: rows.len(),
        });
    }
    Ok(ReturnSeries {
        dates: rows[1..].iter().map(|r| r.date).collect(),
        returns: rows.windows(2).map(|w| w[1].value / w[0].value - 1.0).collect(),
    })
}

/// Reads `date,return` rows as they are.
pub fn ingest_returns(csv_text: &str) -> Result<ReturnSeries, IngestError> {
    let rows = read_rows(csv_text, "return")?;
    if rows.is_empty() {
        return Err(IngestError::TooFewRows { needed: 1, found: 0 });
    }
    Ok(ReturnSeries {
        dates: rows.iter().map(|r| r.date).collect(),
        returns: rows.iter().map(|r| r.value).collect(),
    })
}
