use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// Floats carry 17 significant digits, enough to round-trip every `f64`.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

/// One CSV file: stable header, one row per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io { context: format!("encoding {}", self.file_name()), source: e.into() };
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io { context: format!("encoding {}", self.file_name()), source: e.into_error() })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv()?)
            .map_err(|e| CliError::Io { context: format!("writing {}", path.display()), source: e })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5.930_010_000_000_001, f64::MIN_POSITIVE, 1e300] {
            let s = Cell::Num(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(Cell::Num(f64::INFINITY).render(), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["label", "value"]);
        t.push(vec!["a,b".into(), 0.5.into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "label,value\n\"a,b\",5.0000000000000000e-1\n");
    }
}
