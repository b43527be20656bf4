//! Report envelope and output files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "pcone";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a run writes to its report. Only `wall_time_ms` may differ
/// between two runs with the same config and seed.
#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    pub results: Value,
    pub wall_time_ms: u64,
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_report(&self, report: &Report) -> Result<PathBuf> {
        let path = self.path("report.json");
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// Writes a CSV with one header row; floats use the shortest
    /// round-trip representation.
    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush()?;
        Ok(path)
    }
}
