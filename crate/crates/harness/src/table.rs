//! Rectangular result tables and their CSV/JSON encodings.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    /// `None` encodes a value that could not be computed (failed run,
    /// missing crossing).
    Num(Option<f64>),
    Text(String),
}

impl Cell {
    pub fn num(v: f64) -> Cell {
        Cell::Num(v.is_finite().then_some(v))
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => *v,
            Cell::Text(_) => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            // 17 significant digits: one before the point, sixteen after.
            Cell::Num(Some(v)) => format!("{v:.16e}"),
            Cell::Num(None) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`, one per row.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| HarnessError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let records: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("cells serialize")))
                    .collect()
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&records).map_err(|e| HarnessError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 5.400934504077557];
        let mut t = Table::new(&["x", "note"]);
        for v in vals {
            t.push(vec![Cell::num(v), Cell::text("ok")]);
        }
        t.push(vec![Cell::num(f64::NAN), Cell::text("failed, stage")]);
        let bytes = t.to_csv().unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        for (row, v) in rows.iter().zip(vals) {
            assert_eq!(row[0].parse::<f64>().unwrap(), v);
        }
        assert_eq!(&rows[vals.len()][0], "");
        assert_eq!(&rows[vals.len()][1], "failed, stage");
    }

    #[test]
    fn json_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::num(0.1), Cell::text("x")]);
        t.push(vec![Cell::Num(None), Cell::text("y")]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<Table>(&s).unwrap(), t);
    }
}
