//! Artifact emission: CSV paths, JSON reports, and the run manifest.
//!
//! Numbers are written with the shortest round-trip representation (the
//! standard float formatter), lines end in LF, and files are recorded in
//! the manifest as they are written, so a rerun with the same config and
//! seed reproduces every data file byte for byte. The manifest itself is
//! the one exception: its wall-clock field reflects the actual run.

use std::fmt::Write as _;
use std::fs;
use std::hash::Hasher;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use fnv::FnvHasher;
use levyflow::paths::CadlagPath;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Serialize)]
struct FileEntry {
    name: String,
    rows: u64,
    bytes: u64,
    fnv1a64: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact_version: &'static str,
    command: &'a str,
    config_digest: &'a str,
    wall_clock_seconds: f64,
    files: &'a [FileEntry],
}

/// One validation check: a named number against its configured threshold.
#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Pass when `value` is at most `threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    /// Pass when `value` is at least `threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }
}

/// Report written by experiments (empty `checks`) and validation suites
/// (one entry per criterion). `pass` is the conjunction, absent when
/// there is nothing to check.
#[derive(Serialize)]
pub struct Report {
    pub estimator: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub numbers: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub pass: Option<bool>,
}

impl Report {
    pub fn new(estimator: &str, inputs_digest: &str, seed: u64) -> Self {
        Self {
            estimator: estimator.to_string(),
            inputs_digest: inputs_digest.to_string(),
            seed,
            numbers: BTreeMap::new(),
            checks: Vec::new(),
            pass: None,
        }
    }

    pub fn number(&mut self, name: &str, value: f64) {
        self.numbers.insert(name.to_string(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Fold the checks into the overall verdict.
    pub fn seal(mut self) -> Self {
        if !self.checks.is_empty() {
            self.pass = Some(self.checks.iter().all(|c| c.pass));
        }
        self
    }
}

/// Output directory with a running record of everything written to it.
pub struct OutDir {
    root: PathBuf,
    files: Vec<FileEntry>,
    started: Instant,
}

fn fnv_hex(bytes: &[u8]) -> String {
    let mut hasher = FnvHasher::default();
    hasher.write(bytes);
    format!("{:016x}", hasher.finish())
}

impl OutDir {
    pub fn create(root: PathBuf) -> Result<Self> {
        fs::create_dir_all(&root)
            .with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self { root, files: Vec::new(), started: Instant::now() })
    }

    /// Write a text artifact and record it; `rows` is the caller's count
    /// of data rows (CSV) or meaningful lines (other text).
    pub fn write_text(&mut self, name: &str, text: &str, rows: u64) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            rows,
            bytes: text.len() as u64,
            fnv1a64: fnv_hex(text.as_bytes()),
        });
        Ok(())
    }

    /// Path CSV in the shared schema: a time column, then one column per
    /// component under the given labels.
    pub fn write_path_csv(&mut self, name: &str, path: &CadlagPath, labels: &[String]) -> Result<()> {
        assert_eq!(labels.len(), path.dim());
        let mut text = String::with_capacity(path.len() * (labels.len() + 1) * 12);
        text.push('t');
        for label in labels {
            let _ = write!(text, ",{label}");
        }
        text.push('\n');
        for k in 0..path.len() {
            let _ = write!(text, "{}", path.times()[k]);
            for v in path.point(k) {
                let _ = write!(text, ",{v}");
            }
            text.push('\n');
        }
        self.write_text(name, &text, path.len() as u64)
    }

    /// Generic rectangular CSV.
    pub fn write_table_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut text = String::with_capacity(rows.len() * header.len() * 12 + 64);
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            assert_eq!(row.len(), header.len());
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    text.push(',');
                }
                let _ = write!(text, "{v}");
            }
            text.push('\n');
        }
        self.write_text(name, &text, rows.len() as u64)
    }

    pub fn write_report(&mut self, name: &str, report: &Report) -> Result<()> {
        let mut text = serde_json::to_string_pretty(report).expect("report serialises");
        text.push('\n');
        self.write_text(name, &text, 0)
    }

    /// Write `manifest.json` listing every artifact emitted so far and
    /// consume the directory handle. Call last.
    pub fn finish(self, command: &str, config_digest: &str) -> Result<()> {
        let manifest = Manifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command,
            config_digest,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

/// Column labels `prefix1..prefixN`.
pub fn component_labels(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}
