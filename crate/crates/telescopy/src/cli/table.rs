//! Tabular results with a provenance header, serialized as CSV and JSON.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

/// One table cell.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_escape(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(v) => csv_escape(v),
        }
    }
}

/// Run identity embedded in every emitted table.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub artifact_version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: impl Into<String>, config_sha256: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            config_sha256: config_sha256.into(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }
}

/// Column-schema'd rows plus provenance.
#[derive(Clone, Debug, Serialize)]
pub struct ResultTable {
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(provenance: Provenance, columns: &[&str]) -> Self {
        Self {
            provenance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; the cell count must match the column schema.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity {} does not match schema arity {}",
            row.len(),
            self.columns.len()
        );
        self.rows.push(row);
    }

    /// CSV rendering: `#`-prefixed provenance header, then header row and
    /// data rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", self.provenance.command);
        let _ = writeln!(out, "# config_sha256: {}", self.provenance.config_sha256);
        let _ = writeln!(out, "# artifact_version: {}", self.provenance.artifact_version);
        let _ = writeln!(out, "# seed: {}", self.provenance.seed);
        let _ = writeln!(
            out,
            "{}",
            self.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",")
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{}",
                row.iter().map(Cell::to_csv).collect::<Vec<_>>().join(",")
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats_exactly() {
        let v = std::f64::consts::PI * 1e-7;
        let text = format_float(v);
        let back: f64 = text.parse().unwrap();
        assert_eq!(v.to_bits(), back.to_bits());
    }

    #[test]
    fn csv_layout_and_provenance() {
        let mut table =
            ResultTable::new(Provenance::new("fisher", "ab".repeat(32), 7), &["pair", "value"]);
        table.push(vec!["AB".into(), 0.5.into()]);
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# command: fisher"));
        assert!(lines[1].starts_with("# config_sha256: abab"));
        assert!(lines[3].starts_with("# seed: 7"));
        assert_eq!(lines[4], "pair,value");
        assert_eq!(lines[5], "AB,5.0000000000000000e-1");
    }

    #[test]
    fn cells_escape_commas_and_quotes() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("a\"b"), "\"a\"\"b\"");
        assert_eq!(csv_escape("plain"), "plain");
    }

    #[test]
    #[should_panic(expected = "row arity")]
    fn arity_mismatch_panics() {
        let mut table = ResultTable::new(Provenance::new("x", "h", 0), &["a", "b"]);
        table.push(vec![1i64.into()]);
    }
}
