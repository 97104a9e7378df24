//! File formats: fixed-column CSV with 17 significant digits, JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

/// Flow series columns, in order; verdict columns follow.
pub const SERIES_COLUMNS: [&str; 11] = [
    "t",
    "sup_delta_f",
    "min_delta_f",
    "sup_b2",
    "sup_b2_h_v32",
    "sup_b2_h_sec",
    "max_rho",
    "residual_F2_max",
    "residual_compid_max",
    "slack_B2_min",
    "C_emp",
];

/// A CSV cell: a number, a word, or empty when the value does not exist
/// (monitor disabled, barrier undefined).
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of cells under a header. Returns whether every number was finite.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().flatten().all(|c| !matches!(c, Cell::Num(x) if !x.is_finite()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_float(*x)),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// A markdown table of `(name, verdict, detail)` rows.
pub fn verdict_table(rows: &[(String, String, String)]) -> String {
    let mut out = String::from("| monitor | verdict | detail |\n|---|---|---|\n");
    for (name, verdict, detail) in rows {
        let _ = writeln!(out, "| {name} | {verdict} | {detail} |");
    }
    out
}
