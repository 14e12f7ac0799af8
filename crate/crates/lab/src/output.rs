//! CSV and JSON artifact writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::LabResult;

/// Directory receiving the artifacts of one run.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> LabResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes one CSV row per record, with a header taken from the field names.
    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> LabResult<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> LabResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        Ok(())
    }
}

/// Data row of a CSV file as reported in invariant pointers; the header is row 1.
pub fn csv_row(index: usize) -> usize {
    index + 2
}
