use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::fmt_f64;
use crate::error::Result;

pub const ARTIFACT_VERSION: &str = concat!("ylab ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST: &str = "manifest.json";

/// Where a run stands, as recorded in the manifest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Incomplete,
    Complete,
    Failed,
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Incomplete => "incomplete",
            RunStatus::Complete => "complete",
            RunStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    /// path relative to the run directory, `/`-separated
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// CSV file: a comment line with the config hash and version, the header,
/// then rows.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    width: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, hash: &str, header: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# config_hash={hash} version={ARTIFACT_VERSION}")?;
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter {
            path: path.to_path_buf(),
            out,
            width: header.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        self.cells(&cells)
    }

    pub fn cells(&mut self, cells: &[String]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.width);
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Owns a run directory and its manifest. The manifest is rewritten after
/// every registered artifact, so an interrupted run still lists what it
/// produced and reads `incomplete`.
pub struct RunDir {
    root: PathBuf,
    hash: String,
    study: String,
    artifacts: Vec<Artifact>,
    status: RunStatus,
    error: Option<String>,
}

impl RunDir {
    pub fn open(root: &Path, hash: &str, study: &str) -> Result<Self> {
        fs::create_dir_all(root)?;
        let d = RunDir {
            root: root.to_path_buf(),
            hash: hash.to_string(),
            study: study.to_string(),
            artifacts: Vec::new(),
            status: RunStatus::Incomplete,
            error: None,
        };
        d.write_manifest()?;
        Ok(d)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn csv(&self, rel: &str, header: &[&str]) -> Result<CsvWriter> {
        CsvWriter::create(&self.path(rel), &self.hash, header)
    }

    /// Hashes `rel` and records it.
    pub fn register(&mut self, rel: &str) -> Result<()> {
        let p = self.path(rel);
        let a = Artifact {
            path: rel.to_string(),
            sha256: sha256_file(&p)?,
            bytes: fs::metadata(&p)?.len(),
        };
        self.artifacts.retain(|x| x.path != rel);
        self.artifacts.push(a);
        self.write_manifest()
    }

    /// Two-column plot data `x y`.
    pub fn curve(&mut self, rel: &str, label: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut out = BufWriter::new(File::create(&p)?);
        writeln!(
            out,
            "# {label} config_hash={} version={ARTIFACT_VERSION}",
            self.hash
        )?;
        for (x, y) in xs.iter().zip(ys) {
            writeln!(out, "{} {}", fmt_f64(*x), fmt_f64(*y))?;
        }
        out.flush()?;
        drop(out);
        self.register(rel)
    }

    pub fn json(&mut self, rel: &str, value: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("json values serialise");
        fs::write(self.path(rel), text + "\n")?;
        self.register(rel)
    }

    pub fn finish(&mut self, status: RunStatus, error: Option<String>) -> Result<()> {
        self.status = status;
        self.error = error;
        self.write_manifest()
    }

    fn write_manifest(&self) -> Result<()> {
        let arts: Vec<Value> = self
            .artifacts
            .iter()
            .map(|a| json!({"path": a.path, "sha256": a.sha256, "bytes": a.bytes}))
            .collect();
        let m = json!({
            "study": self.study,
            "config_hash": self.hash,
            "version": ARTIFACT_VERSION,
            "status": self.status.name(),
            "error": self.error,
            "artifacts": arts,
        });
        let tmp = self.root.join(".manifest.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&m).expect("json") + "\n")?;
        fs::rename(tmp, self.root.join(MANIFEST))?;
        Ok(())
    }
}

/// Reads the status field of a manifest.
pub fn manifest_status(root: &Path) -> Result<RunStatus> {
    let text = fs::read_to_string(root.join(MANIFEST))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| crate::error::LabError::Format(format!("manifest: {e}")))?;
    Ok(match v["status"].as_str() {
        Some("complete") => RunStatus::Complete,
        Some("failed") => RunStatus::Failed,
        _ => RunStatus::Incomplete,
    })
}
