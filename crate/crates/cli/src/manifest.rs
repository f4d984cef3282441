//! Run manifests: one JSON per invocation, written next to the outputs,
//! recording the resolved configuration and every file the run produced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// Input file, absent for generators.
    pub input: Option<String>,
    /// Every flag after defaulting, so a rerun can reproduce the outputs.
    pub config: Value,
    /// All files written by this run, including the manifest itself.
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<&'static str, f64>,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn new(subcommand: &str, input: Option<&Path>, config: Value) -> Self {
        Self {
            tool: "ttspin",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.into(),
            input: input.map(|p| p.display().to_string()),
            config,
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
            exit_code: 0,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_timing(&mut self, phase: &'static str, ms: f64) {
        self.timings_ms.insert(phase, ms);
    }

    /// Write the manifest to `path`, listing it among its own outputs.
    pub fn write(mut self, path: &Path) -> Result<(), Failure> {
        self.record_output(path);
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(path, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
    }
}

/// Resolve the output directory, creating it when missing.
pub fn prepare_out_dir(out: &Path) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", out.display())))?;
    Ok(out.to_path_buf())
}
