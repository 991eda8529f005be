//! Column-oriented firm-day table shared by the corpus, econometrics and
//! evaluation modules.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Tokens read as a missing value in numeric columns.
pub const MISSING_TOKENS: [&str; 3] = ["", "NA", "."];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub firm_id: Vec<String>,
    pub date: Vec<NaiveDate>,
    /// Explicit quarter label per row; `None` falls back to the calendar
    /// quarter of the date.
    pub quarter: Vec<Option<String>>,
    columns: IndexMap<String, Vec<Option<f64>>>,
}

pub fn calendar_quarter(date: NaiveDate) -> String {
    format!("{}Q{}", date.year(), date.month0() / 3 + 1)
}

pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%Y%m%d"))
        .ok()
}

pub fn parse_value(raw: &str) -> std::result::Result<Option<f64>, String> {
    let raw = raw.trim();
    if MISSING_TOKENS.contains(&raw) {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(_) => Err(format!("{raw:?} is not a number")),
    }
}

/// Fixed formatting used by every machine-readable output.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(v) => {
            let s = format!("{v:.10}");
            if s == "-0.0000000000" {
                "0.0000000000".to_string()
            } else {
                s
            }
        }
        None => String::new(),
    }
}

impl Frame {
    pub fn new(firm_id: Vec<String>, date: Vec<NaiveDate>) -> Result<Self> {
        if firm_id.len() != date.len() {
            return Err(Error::Integrity(format!("{} firm ids but {} dates", firm_id.len(), date.len())));
        }
        let n = firm_id.len();
        Ok(Frame { firm_id, date, quarter: vec![None; n], columns: IndexMap::new() })
    }

    pub fn len(&self) -> usize {
        self.date.len()
    }

    pub fn is_empty(&self) -> bool {
        self.date.is_empty()
    }

    pub fn quarter_of(&self, row: usize) -> String {
        self.quarter[row].clone().unwrap_or_else(|| calendar_quarter(self.date[row]))
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("column {name:?} not present in the frame")))
    }

    /// Adds or replaces a column.
    pub fn set_column(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(Error::Integrity(format!(
                "column {name:?} has {} values for {} rows",
                values.len(),
                self.len()
            )));
        }
        self.columns.insert(name, values);
        Ok(())
    }

    pub fn remove_column(&mut self, name: &str) -> Option<Vec<Option<f64>>> {
        self.columns.shift_remove(name)
    }

    /// New frame holding `rows` (in the given order).
    pub fn take(&self, rows: &[usize]) -> Frame {
        Frame {
            firm_id: rows.iter().map(|&r| self.firm_id[r].clone()).collect(),
            date: rows.iter().map(|&r| self.date[r]).collect(),
            quarter: rows.iter().map(|&r| self.quarter[r].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|(k, v)| (k.clone(), rows.iter().map(|&r| v[r]).collect()))
                .collect(),
        }
    }

    /// Errors if a (firm, date) key occurs twice.
    pub fn check_unique_keys(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (firm, date) in self.firm_id.iter().zip(&self.date) {
            if !seen.insert((firm, date)) {
                return Err(Error::Integrity(format!("duplicate panel row for firm {firm} on {date}")));
            }
        }
        Ok(())
    }

    /// Reads a delimited file whose header names `permno` and `date`, an
    /// optional `quarter`, and numeric columns.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Frame> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader(reader: impl Read, origin: &str) -> Result<Frame> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let find = |name: &str| header.iter().position(|h| h == name);
        let ingest = |line: usize, message: String| Error::Ingestion { path: origin.to_string(), line, message };
        let firm_col = find("permno").ok_or_else(|| ingest(1, "header lacks a permno column".into()))?;
        let date_col = find("date").ok_or_else(|| ingest(1, "header lacks a date column".into()))?;
        let quarter_col = find("quarter");
        let value_cols: Vec<usize> =
            (0..header.len()).filter(|&i| i != firm_col && i != date_col && Some(i) != quarter_col).collect();
        let mut seen = HashSet::new();
        for &i in &value_cols {
            if !seen.insert(&header[i]) {
                return Err(ingest(1, format!("column {:?} appears twice", header[i])));
            }
        }

        let mut firm_id = Vec::new();
        let mut date = Vec::new();
        let mut quarter = Vec::new();
        let mut values: Vec<Vec<Option<f64>>> = vec![Vec::new(); value_cols.len()];
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record?;
            let firm = record.get(firm_col).unwrap_or("").to_string();
            if firm.is_empty() {
                return Err(ingest(line, "empty permno".into()));
            }
            let raw_date = record.get(date_col).unwrap_or("");
            let d = parse_date(raw_date).ok_or_else(|| ingest(line, format!("unparseable date {raw_date:?}")))?;
            firm_id.push(firm);
            date.push(d);
            quarter.push(quarter_col.and_then(|q| record.get(q)).filter(|q| !q.is_empty()).map(str::to_string));
            for (slot, &c) in values.iter_mut().zip(&value_cols) {
                let v = parse_value(record.get(c).unwrap_or(""))
                    .map_err(|m| ingest(line, format!("column {:?}: {m}", header[c])))?;
                slot.push(v);
            }
        }
        let columns = value_cols.iter().map(|&c| header[c].clone()).zip(values).collect();
        let frame = Frame { firm_id, date, quarter, columns };
        frame.check_unique_keys()?;
        Ok(frame)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(file)
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["permno".to_string(), "date".to_string(), "quarter".to_string()];
        header.extend(self.columns.keys().cloned());
        w.write_record(&header)?;
        for r in 0..self.len() {
            let mut row = vec![self.firm_id[r].clone(), self.date[r].to_string(), self.quarter_of(r)];
            row.extend(self.columns.values().map(|c| format_value(c[r])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<frame output>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_missing_tokens_and_quarters() {
        let csv = "permno,date,DGTW,FE\n10001,2020-01-02,1.5,NA\n10002,20200401,.,0.2\n";
        let f = Frame::from_reader(csv.as_bytes(), "t").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.column("DGTW").unwrap(), &[Some(1.5), None]);
        assert_eq!(f.column("FE").unwrap(), &[None, Some(0.2)]);
        assert_eq!(f.quarter_of(1), "2020Q2");
        assert!(f.column("Pre").is_err());
    }

    #[test]
    fn duplicate_keys_rejected() {
        let csv = "permno,date,DGTW\n1,2020-01-02,1\n1,2020-01-02,2\n";
        assert!(matches!(Frame::from_reader(csv.as_bytes(), "t"), Err(Error::Integrity(_))));
    }

    #[test]
    fn bad_value_reports_line() {
        let csv = "permno,date,DGTW\n1,2020-01-02,1\n2,2020-01-02,abc\n";
        match Frame::from_reader(csv.as_bytes(), "t") {
            Err(Error::Ingestion { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let csv = "permno,date,quarter,DGTW\n1,2020-01-02,2020Q1,1.2500000000\n2,2020-01-03,2020Q1,\n";
        let f = Frame::from_reader(csv.as_bytes(), "t").unwrap();
        let mut out = Vec::new();
        f.to_writer(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), csv);
    }

    #[test]
    fn negative_zero_formats_as_zero() {
        assert_eq!(format_value(Some(-0.0)), "0.0000000000");
        assert_eq!(format_value(None), "");
    }
}
