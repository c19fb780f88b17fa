use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use super::config::Experiment;

/// Formats a float with 17 significant digits. Negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn cmp_key(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Cell::Int(_) => 0,
            Cell::Float(_) => 1,
            Cell::Text(_) => 2,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(x) => f.write_str(&fmt_f64(*x)),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// One output record: parameter cells, value cells and an optional method tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: Experiment,
    pub params: Vec<Cell>,
    pub values: Vec<Cell>,
    pub method: Option<&'static str>,
}

/// Rows plus the column names they fill, in declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub param_columns: Vec<&'static str>,
    pub value_columns: Vec<&'static str>,
    pub has_method: bool,
    pub rows: Vec<SweepRow>,
}

impl Table {
    pub fn new(
        param_columns: &[&'static str],
        value_columns: &[&'static str],
        has_method: bool,
    ) -> Self {
        Table {
            param_columns: param_columns.to_vec(),
            value_columns: value_columns.to_vec(),
            has_method,
            rows: Vec::new(),
        }
    }

    /// Sorts rows lexicographically by parameter cells, then method.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.params
                .iter()
                .zip(&b.params)
                .map(|(x, y)| x.cmp_key(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.method.cmp(&b.method))
        });
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["experiment"];
        cols.extend(&self.param_columns);
        cols.extend(&self.value_columns);
        if self.has_method {
            cols.push("method");
        }
        cols.join(",")
    }

    /// Renders `comment`, the header and every row, each terminated by `\n`.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{comment}");
        let _ = writeln!(out, "{}", self.header());
        for row in &self.rows {
            out.push_str(row.experiment.name());
            for c in row.params.iter().chain(&row.values) {
                let _ = write!(out, ",{c}");
            }
            if let Some(m) = row.method {
                let _ = write!(out, ",{m}");
            }
            out.push('\n');
        }
        out
    }
}
