//! Plot-ready CSV tables and atomic file output.
//!
//! Tables always start with a `frequency_hz` column. Values are written in
//! scientific notation with 12 significant digits and LF line endings, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    frequency_hz: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl CsvTable {
    pub fn new(frequency_hz: Vec<f64>) -> Self {
        CsvTable {
            frequency_hz,
            columns: Vec::new(),
        }
    }

    /// Adds a column; it must have one value per frequency.
    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.frequency_hz.len() {
            return Err(Error::InvalidGrid(format!(
                "column `{name}` has {} values for {} frequencies",
                values.len(),
                self.frequency_hz.len()
            )));
        }
        self.columns.push((name, values));
        Ok(self)
    }

    pub fn header(&self) -> Vec<&str> {
        std::iter::once("frequency_hz")
            .chain(self.columns.iter().map(|(n, _)| n.as_str()))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for (i, f) in self.frequency_hz.iter().enumerate() {
            let _ = write!(out, "{}", format_value(*f));
            for (_, col) in &self.columns {
                let _ = write!(out, ",{}", format_value(col[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
