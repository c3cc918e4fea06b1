//! Output directory layout and run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        for sub in ["games", "policies", "reports"] {
            let p = root.join(sub);
            std::fs::create_dir_all(&p).with_context(|| format!("creating {}", p.display()))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            timings: BTreeMap::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let p = self.path(rel);
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
        self.record(rel);
        Ok(())
    }

    /// Notes a file written by library code.
    pub fn record(&mut self, rel: &str) {
        self.written.push(rel.to_string());
    }

    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(label.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn add_timing(&mut self, label: String, ms: f64) {
        self.timings.insert(label, ms);
    }

    pub fn finish(self, command: &str, config_json: &str, seed: u64, threads: Option<usize>) -> Result<()> {
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config_sha256: hex_digest(config_json.as_bytes()),
            timestamp: chrono::Utc::now().to_rfc3339(),
            threads,
            parallel: maxent_bw::exec::parallel_enabled(),
            outputs: self.written,
            timings_ms: self.timings,
        };
        let p = self.root.join("manifest.json");
        std::fs::write(&p, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", p.display()))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config_sha256: String,
    timestamp: String,
    threads: Option<usize>,
    parallel: bool,
    outputs: Vec<String>,
    timings_ms: BTreeMap<String, f64>,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
