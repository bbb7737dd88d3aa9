//! Every run writes a JSON manifest next to its outputs: the subcommand, the
//! fully resolved configuration, the master seed, digests of all inputs, the
//! tool version, and wall-clock timings. Two runs that should be identical
//! can be compared by diffing their manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::errors::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: u64,
    /// CRC-64/XZ of the raw file contents, hex encoded.
    pub digest: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    /// Fully resolved configuration after flag/env/default precedence.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub timings_seconds: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, seed: u64, config: serde_json::Value) -> RunManifest {
        RunManifest {
            tool: "modquery",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_seconds: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records a digest of an input file (path as given on the command line).
    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            bytes: bytes.len() as u64,
            digest: format!("{:016x}", modquery::hashing::crc64(&bytes)),
        });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn add_timing(&mut self, label: &str, since: Instant) {
        self.timings_seconds
            .insert(label.to_string(), since.elapsed().as_secs_f64());
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes the manifest atomically to `path`.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        atomic_write(path, self.to_json()?.as_bytes())
    }
}

/// Writes via a temp file in the destination directory plus a rename, so a
/// crash never leaves a half-written file under the final name.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp: PathBuf = {
        let mut name = path
            .file_name()
            .map(|s| s.to_os_string())
            .unwrap_or_else(|| "out".into());
        name.push(format!(".tmp.{}", std::process::id()));
        match dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        }
    };
    let write_all = |p: &Path| -> std::io::Result<()> {
        let mut f = fs::File::create(p)?;
        f.write_all(contents)?;
        f.sync_all()
    };
    write_all(&tmp).map_err(|e| {
        CliError::io(format!("cannot write {}: {e}", tmp.display()))
    })?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(format!("cannot move output into place at {}: {e}", path.display()))
    })
}
