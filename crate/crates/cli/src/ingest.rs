//! Price files.
//!
//! Two layouts, UTF-8 and comma-delimited:
//!
//! ```text
//! t,price              date,price
//! 0,2046.61            2016-05-20,2052.32
//! 0.004,2052.32        2016-05-23,2048.04
//! ```
//!
//! Numeric times are taken verbatim and must start at 0. Dates must be
//! strictly increasing weekdays; the k-th row (counting from 0) is placed at
//! `k / 250`, the business-day convention. No holiday calendar is applied:
//! the rows are the trading days.

use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use qhedge::ObservedPath;

use crate::error::{CliError, Result};

pub const BUSINESS_DAYS_PER_YEAR: f64 = 250.0;

enum Layout {
    Times,
    Dates,
}

pub fn ingest_csv(path: &Path) -> Result<ObservedPath> {
    let file = path.display().to_string();
    let fail = |row: Option<usize>, message: String| CliError::Input {
        file: file.clone(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(None, e.to_string()))?;
    let header = reader.headers().map_err(|e| fail(Some(1), e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let layout = match names.as_slice() {
        ["t", "price"] => Layout::Times,
        ["date", "price"] => Layout::Dates,
        _ => {
            return Err(fail(
                Some(1),
                format!("header must be `t,price` or `date,price`, got `{}`", names.join(",")),
            ))
        }
    };

    let mut times = Vec::new();
    let mut prices = Vec::new();
    let mut last_date: Option<NaiveDate> = None;
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| fail(Some(line), e.to_string()))?;
        if record.len() != 2 {
            return Err(fail(Some(line), format!("expected 2 fields, got {}", record.len())));
        }
        let price: f64 = record[1]
            .parse()
            .map_err(|_| fail(Some(line), format!("price `{}` is not a number", &record[1])))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(fail(Some(line), format!("price must be positive, got {price}")));
        }
        let t = match layout {
            Layout::Times => record[0]
                .parse::<f64>()
                .map_err(|_| fail(Some(line), format!("time `{}` is not a number", &record[0])))?,
            Layout::Dates => {
                let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| {
                    fail(Some(line), format!("date `{}` is not YYYY-MM-DD", &record[0]))
                })?;
                if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                    return Err(fail(Some(line), format!("{date} is not a business day")));
                }
                if let Some(prev) = last_date {
                    if date <= prev {
                        return Err(fail(Some(line), format!("date {date} does not follow {prev}")));
                    }
                }
                last_date = Some(date);
                k as f64 / BUSINESS_DAYS_PER_YEAR
            }
        };
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(fail(Some(line), format!("time {t} does not follow {prev}")));
            }
        } else if t != 0.0 {
            return Err(fail(Some(line), format!("the first observation must be at t = 0, got {t}")));
        }
        times.push(t);
        prices.push(price);
    }
    if times.is_empty() {
        return Err(fail(None, "no observations".into()));
    }
    ObservedPath::new(times, prices).map_err(|e| fail(None, e.to_string()))
}
