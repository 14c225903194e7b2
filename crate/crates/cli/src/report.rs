//! Tabular report emission. CSV output is LF-terminated with numbers fixed
//! at six decimals so repeated runs diff cleanly.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(usize),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v) => format!("{v:.6}"),
            Cell::Int(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let width = self.header.len();
        if let Some(i) = self.rows.iter().position(|r| r.len() != width) {
            bail!(
                "row {i} has {} cells, header has {width}",
                self.rows[i].len()
            );
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render))?;
        }
        Ok(writer.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Write `table` as CSV to `destination`, returning the byte count.
pub fn emit_table_csv(table: &Table, destination: &Path) -> Result<usize> {
    let bytes = table.to_csv()?;
    fs::write(destination, &bytes)
        .with_context(|| format!("cannot write {}", destination.display()))?;
    Ok(bytes.len())
}

pub fn emit_json(value: &serde_json::Value, destination: &Path) -> Result<usize> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(destination, &text)
        .with_context(|| format!("cannot write {}", destination.display()))?;
    Ok(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_rule() {
        assert_eq!(Cell::Num(0.916_666_666_6).render(), "0.916667");
        assert_eq!(Cell::Num(1.0).render(), "1.000000");
    }

    #[test]
    fn header_only() {
        let t = Table::new(["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
    }

    #[test]
    fn quoting_and_lf() {
        let mut t = Table::new(["name", "value"]);
        t.push(vec!["x,y".into(), 0.5.into()]);
        t.push(vec![Cell::Empty, 3usize.into()]);
        assert_eq!(
            String::from_utf8(t.to_csv().unwrap()).unwrap(),
            "name,value\n\"x,y\",0.500000\n,3\n"
        );
    }

    #[test]
    fn ragged_rows_rejected() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![1.0.into()]);
        assert!(t.to_csv().is_err());
    }

    #[test]
    fn emit_reports_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(["generator", "L1", "L2", "L3", "L4"]);
        t.push(vec![
            "g1".into(),
            0.933.into(),
            0.944.into(),
            0.945.into(),
            0.938.into(),
        ]);
        t.push(vec![
            "g2".into(),
            0.85.into(),
            0.912.into(),
            0.91.into(),
            0.907.into(),
        ]);
        let path = dir.path().join("od.csv");
        let n = emit_table_csv(&t, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(n, text.len());
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn unwritable_destination() {
        let t = Table::new(["a"]);
        let err = emit_table_csv(&t, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("cannot write"));
    }
}
