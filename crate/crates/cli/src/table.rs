//! Result tables and their CSV rendering.
//!
//! Reals are printed as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`. Fields are separated by `,`, lines end in `\n`.

use std::fmt::Write as _;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn count(v: u64) -> Cell {
        Cell::Int(i64::try_from(v).expect("count fits in i64"))
    }

    pub fn index(v: usize) -> Cell {
        Cell::count(v as u64)
    }

    fn render(&self, out: &mut String) {
        match self {
            Cell::Real(v) if v.is_nan() => out.push_str("NaN"),
            Cell::Real(v) if v.is_infinite() => out.push_str(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Real(v) => write!(out, "{v:.16e}").expect("write to String"),
            Cell::Int(v) => write!(out, "{v}").expect("write to String"),
            Cell::Text(s) => out.push_str(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

/// A header row and rectangular data rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Result<Table, CliError> {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(CliError::config(format!("duplicate column `{c}`")));
            }
        }
        Ok(Table {
            columns,
            rows: Vec::new(),
        })
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    fn render(&self, out: &mut String) {
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(out);
            }
            out.push('\n');
        }
    }
}

/// Provenance comments, the main table, and optional titled blocks that
/// follow it after a blank line.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub provenance: Vec<String>,
    pub main: Table,
    pub blocks: Vec<(String, Table)>,
}

impl ResultTable {
    pub fn new(main: Table) -> ResultTable {
        ResultTable {
            provenance: Vec::new(),
            main,
            blocks: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.provenance.push(line.into());
    }

    pub fn block(&mut self, title: impl Into<String>, table: Table) {
        self.blocks.push((title.into(), table));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        self.main.render(&mut out);
        for (title, table) in &self.blocks {
            out.push('\n');
            out.push_str("# ");
            out.push_str(title);
            out.push('\n');
            table.render(&mut out);
        }
        out
    }
}
