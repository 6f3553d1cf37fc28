use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use steiner_ps::grid::write_field;
use steiner_ps::solver::HistoryEntry;
use steiner_ps::{GridFunction, Scalar};

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub outputs: Vec<OutputFile>,
    pub wall_time: f64,
    pub version: String,
    /// Seconds since the Unix epoch at completion; the only timestamp of a run.
    pub finished_at: u64,
}

/// Output directory that records every file it writes.
pub struct OutDir {
    root: PathBuf,
    written: Vec<OutputFile>,
    started: Instant,
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(OutputFile {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(rel, &text)
    }

    pub fn field<T: Scalar>(&mut self, rel: &str, u: &GridFunction<T>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        write_field(u, &mut buf)?;
        self.write(rel, &buf)
    }

    pub fn history(&mut self, rel: &str, history: &[HistoryEntry]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "iteration,energy,residual")?;
        for h in history {
            writeln!(buf, "{},{},{}", h.iteration, num(h.energy), num(h.residual))?;
        }
        self.write(rel, &buf)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(mut self, command: &str, config: Option<&Path>) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: config.map(|p| p.display().to_string()),
            outputs: std::mem::take(&mut self.written),
            wall_time: self.started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            finished_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(())
    }
}
