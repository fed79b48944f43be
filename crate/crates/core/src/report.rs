//! Tabular output: CSV with a leading `#` parameter line, or JSON.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest representation that parses back to the same f64
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    /// Parameters recorded in the comment line, in order.
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            params: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        let mut text = value.to_string();
        // floats in their shortest round-trip form, e.g. 1e-13 not 0.0000000000001
        if text.contains('.') {
            if let Ok(v) = text.parse::<f64>() {
                text = format!("{v:?}");
            }
        }
        self.params.push((key.to_string(), text));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        if !self.params.is_empty() {
            out.push('#');
            for (k, v) in &self.params {
                out.push_str(&format!(" {k}={v}"));
            }
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Scenario(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Scenario(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Scenario(format!("json: {e}")))
    }

    /// Reads numeric CSV written by [`Table::to_csv`]; text cells stay text.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut params = Vec::new();
        if let Some(line) = text.lines().next().and_then(|l| l.strip_prefix('#')) {
            for kv in line.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    params.push((k.to_string(), v.to_string()));
                }
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let io = |e: csv::Error| Error::Scenario(format!("csv: {e}"));
        let header = r.headers().map_err(io)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io)?;
            rows.push(rec.iter().map(parse_cell).collect());
        }
        Ok(Self {
            params,
            header,
            rows,
        })
    }
}

fn parse_cell(s: &str) -> Cell {
    if let Ok(i) = s.parse::<i64>() {
        Cell::Int(i)
    } else if let Ok(v) = s.parse::<f64>() {
        Cell::Num(v)
    } else {
        Cell::Text(s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20)) {
            let mut t = Table::new(&["i", "x"]).param("seed", 7);
            for (i, &v) in values.iter().enumerate() {
                t.push(vec![Cell::from(i), Cell::from(v)]);
            }
            let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
            prop_assert_eq!(back.params, t.params);
            for (row, &v) in back.rows.iter().zip(&values) {
                let got = match row[1] {
                    Cell::Num(x) => x,
                    Cell::Int(i) => i as f64,
                    Cell::Text(_) => f64::NAN,
                };
                prop_assert_eq!(got.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn comment_line_first() {
        let t = Table::new(&["a"]).param("B", "5e6").param("M", 100);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("# B=5e6 M=100\na\n"));
    }
}
