//! Tabular reports rendered as CSV (17 significant digits) or JSON.

use crate::error::CliError;
use crate::plot::Plot;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Self::Empty, Into::into)
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => format_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Bool(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Output of one subcommand.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    pub json: Value,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    pub plot: Option<Plot>,
    /// Failed invariant checks; non-empty means exit code 3.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, table: Table, json: Value) -> Self {
        Self {
            command,
            table,
            json,
            summary: Vec::new(),
            plot: None,
            failures: Vec::new(),
        }
    }

    pub fn json_text(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(&self.json)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, std::f64::consts::PI] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_header_and_blank_for_missing() {
        let mut t = Table::new(&["j", "x", "note"]);
        t.push(vec![0usize.into(), None::<f64>.into(), "a,b".into()]);
        assert_eq!(t.to_csv().unwrap(), "j,x,note\n0,,\"a,b\"\n");
    }
}
