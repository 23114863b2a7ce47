//! Output staging. Commands collect every file in memory and the set is
//! written only once all computation has succeeded.

use std::path::{Path, PathBuf};

use backaction::io::write_atomic;

use crate::error::{CliError, Result};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
    summary: Vec<String>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// `relative` is a path below the output directory.
    pub fn add(&mut self, relative: impl Into<PathBuf>, contents: String) {
        self.files.push((relative.into(), contents));
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn files(&self) -> &[(PathBuf, String)] {
        &self.files
    }

    pub fn summary(&self) -> &[String] {
        &self.summary
    }

    pub fn extend(&mut self, other: OutputSet) {
        self.files.extend(other.files);
        self.summary.extend(other.summary);
    }

    /// Writes every file below `dir`. Files already written are removed
    /// again if a later one fails.
    pub fn commit(&self, dir: &Path) -> Result<()> {
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for (rel, contents) in &self.files {
                let path = dir.join(rel);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                        path: parent.to_path_buf(),
                        source,
                    })?;
                }
                write_atomic(&path, contents.as_bytes())?;
                written.push(path);
            }
            Ok(())
        })();
        if result.is_err() {
            for path in written {
                let _ = std::fs::remove_file(path);
            }
        }
        result
    }
}
