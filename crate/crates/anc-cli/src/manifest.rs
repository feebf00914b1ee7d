//! Run manifests: what was run, with which parameters, producing which files.
//!
//! The manifest is the one output that carries a timestamp; every other
//! file a command writes is a pure function of its inputs and seeds.

use anc::Result;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub struct Manifest {
    lines: Vec<(String, String)>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(argv: &[String], seed: Option<u64>) -> Self {
        let mut m = Manifest {
            lines: Vec::new(),
            outputs: Vec::new(),
        };
        m.set("command", argv.join(" "));
        m.set("version", env!("CARGO_PKG_VERSION"));
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        m.set("timestamp_unix", ts.to_string());
        match seed {
            Some(s) => m.set("seed", s.to_string()),
            None => m.set("seed", "-"),
        }
        m
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_string(), value.into()));
    }

    /// Snapshot every entry of the loaded config file.
    pub fn snapshot_config(&mut self, config: &anc::config::Config) {
        for (k, v) in config.entries() {
            self.set(&format!("config.{k}"), v);
        }
    }

    /// Record a produced file (relative to the output directory).
    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(text, "{k} = {v}");
        }
        for name in &self.outputs {
            let _ = writeln!(text, "output = {name}");
        }
        std::fs::write(out_dir.join("manifest.txt"), text)?;
        Ok(())
    }
}
