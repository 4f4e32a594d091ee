//! `date,rate` CSV ingestion and emission.
//!
//! Dates are ISO-8601 (`YYYY-MM-DD`), rates plain decimals. Rows whose rate
//! is empty or zero are skipped and counted; anything else that cannot be
//! used is an error carrying the file and line.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{MfdfaError, Result};
use crate::series::{PriceSeries, ReturnSeries};

/// A parsed price file plus the number of rows skipped for an empty or zero rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub prices: PriceSeries,
    pub skipped_rows: usize,
}

pub fn read_price_csv_path(path: &Path) -> Result<Ingested> {
    let file = std::fs::File::open(path)
        .map_err(|e| MfdfaError::Io(format!("{}: {e}", path.display())))?;
    read_price_csv(file, &path.display().to_string())
}

/// Parses `date,rate` rows. `origin` labels error messages.
pub fn read_price_csv<R: Read>(reader: R, origin: &str) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let err = |line: u64, message: String| MfdfaError::Csv {
        path: origin.to_string(),
        line,
        message,
    };

    let headers = rdr
        .headers()
        .map_err(|e| err(1, format!("cannot read header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "rate" {
        return Err(err(
            1,
            format!("expected header `date,rate`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut skipped_rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| err(line, format!("bad date {:?}: {e}", &record[0])))?;
        let raw = &record[1];
        if raw.is_empty() {
            skipped_rows += 1;
            continue;
        }
        let rate: f64 = raw
            .parse()
            .map_err(|_| err(line, format!("bad rate {raw:?} on {date}")))?;
        if rate == 0.0 {
            skipped_rows += 1;
            continue;
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(err(line, format!("non-positive rate {rate} on {date}")));
        }
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(err(line, format!("date {date} does not follow {prev}")));
            }
        }
        dates.push(date);
        values.push(rate);
    }
    let prices = PriceSeries::new(dates, values).map_err(|e| MfdfaError::Csv {
        path: origin.to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok(Ingested {
        prices,
        skipped_rows,
    })
}

/// Writes `date,rate`; rates use the shortest representation that parses
/// back to the same `f64`.
pub fn write_price_csv<W: Write>(writer: W, prices: &PriceSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| MfdfaError::Io(e.to_string());
    w.write_record(["date", "rate"]).map_err(io)?;
    for (d, v) in prices.dates().iter().zip(prices.values()) {
        w.write_record([d.format("%Y-%m-%d").to_string(), format!("{v:?}")])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Integrates returns into a dated price path, `P(0) = initial` on `start`
/// and one calendar day per step, scaling returns by `scale`.
pub fn prices_from_returns(
    x: &ReturnSeries,
    start: NaiveDate,
    initial: f64,
    scale: f64,
) -> Result<PriceSeries> {
    let n = x.len() + 1;
    let dates: Vec<NaiveDate> = start.iter_days().take(n).collect();
    if dates.len() != n {
        return Err(MfdfaError::Config("date range overflows the calendar".into()));
    }
    let mut log_p = initial.ln();
    let mut values = Vec::with_capacity(n);
    values.push(initial);
    for &r in x.values() {
        log_p += scale * r;
        values.push(log_p.exp());
    }
    PriceSeries::new(dates, values)
}
