//! Atomic artifact writes, content hashing, run manifests, and the per-run
//! output-directory lock.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot hash {}: {e}", path.display())))?;
    Ok(sha256_bytes(&bytes))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write via a temporary file in the same directory, then rename into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .ok_or_else(|| CliError::Data(format!("no parent directory for {}", path.display())))?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".into())
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Machine-readable record of one subcommand run: config echo plus content
/// hashes of everything read and written. Deliberately carries no timestamps
/// so reruns are byte-identical.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(subcommand: &str, config: &RunConfig) -> Manifest {
        Manifest {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.echo(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Write an output artifact atomically and record its hash.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        atomic_write(path, bytes)?;
        self.outputs
            .insert(path.display().to_string(), sha256_bytes(bytes));
        Ok(())
    }

    pub fn finish(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("manifest serialization: {e}")))?;
        atomic_write(&path, json.as_bytes())?;
        Ok(path)
    }
}

/// Exclusive lock on an output directory; one subcommand at a time.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(out_dir: &Path) -> CliResult<DirLock> {
        fs::create_dir_all(out_dir)?;
        let path = out_dir.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Data(
                format!(
                    "output directory {} is locked by another run (remove {} if stale)",
                    out_dir.display(),
                    path.display()
                ),
            )),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
