//! Deterministic CSV tables: header row, comma separator, LF line endings and
//! every number in scientific notation with a fixed number of digits.

use std::io::Write;
use std::path::Path;

use crate::error::{DhoError, Result};

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_number(*v, precision)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_string(&self, precision: usize) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf, precision)?;
        String::from_utf8(buf).map_err(|e| DhoError::Io(e.to_string()))
    }

    pub fn write_file(&self, path: &Path, precision: usize) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| DhoError::Io(format!("{}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file), precision)
    }

    pub fn read_from<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers()?.iter().map(str::to_string).collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| DhoError::Io(format!("bad number {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| DhoError::Io(format!("{}: {e}", path.display())))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// `precision` significant decimals after the point, scientific notation;
/// negative zero prints as zero.
pub fn format_number(v: f64, precision: usize) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.precision$e}")
}
