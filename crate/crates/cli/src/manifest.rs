//! Run manifests and the files they describe.
//!
//! Every data file starts with `#` comment lines carrying the SHA-256 of the
//! manifest written next to it, so a CSV can always be matched to the exact
//! command, parameters and tolerances that produced it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rotor_core::quantum::{Tolerances, TruncationStep};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "rotor";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSettings {
    pub survival_change: f64,
    pub top_shell: f64,
    pub max_nmax: usize,
}

impl From<&Tolerances> for ToleranceSettings {
    fn from(t: &Tolerances) -> Self {
        Self {
            survival_change: t.survival_change,
            top_shell: t.top_shell,
            max_nmax: t.max_nmax,
        }
    }
}

impl From<ToleranceSettings> for Tolerances {
    fn from(t: ToleranceSettings) -> Self {
        Tolerances {
            survival_change: t.survival_change,
            top_shell: t.top_shell,
            max_nmax: t.max_nmax,
        }
    }
}

/// One truncation tried while converging a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub label: String,
    pub nmax: usize,
    pub survival: f64,
    pub top_shell: f64,
    pub excitation_change: f64,
}

impl TraceRecord {
    pub fn from_step(label: &str, s: &TruncationStep) -> Self {
        Self {
            label: label.to_string(),
            nmax: s.nmax,
            survival: s.survival,
            top_shell: s.top_shell,
            excitation_change: s.excitation_change,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without the output directory.
    pub args: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub tolerances: ToleranceSettings,
    pub nmax_trace: Vec<TraceRecord>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::usage(format!("unreadable manifest: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects the files of one run and writes them together with the manifest.
pub struct RunOutput {
    manifest: RunManifest,
    files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn new(command: &str, args: &[String], tolerances: &Tolerances) -> Self {
        Self {
            manifest: RunManifest {
                tool: TOOL.into(),
                version: VERSION.into(),
                command: command.into(),
                args: args.to_vec(),
                parameters: BTreeMap::new(),
                tolerances: tolerances.into(),
                nmax_trace: Vec::new(),
                outputs: Vec::new(),
            },
            files: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.manifest.parameters.insert(key.into(), value.into());
    }

    pub fn trace(&mut self, record: TraceRecord) {
        self.manifest.nmax_trace.push(record);
    }

    /// Queues a CSV body (header row included) under `name`.
    pub fn csv(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    /// Writes every queued file and the manifest into `dir`; returns the
    /// manifest path.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        self.manifest.outputs = self.files.iter().map(|(n, _)| n.clone()).collect();
        let json = self.manifest.to_json();
        let hash = sha256_hex(json.as_bytes());
        let manifest_name = self.manifest.file_name();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, body) in &self.files {
            let path = dir.join(name);
            let text = format!(
                "# {TOOL} {VERSION} {}\n# manifest {manifest_name} sha256:{hash}\n{body}",
                self.manifest.command
            );
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
        let path = dir.join(&manifest_name);
        fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Formats a row of numbers with 17 significant digits.
pub fn csv_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}
