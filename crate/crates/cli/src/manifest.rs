use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, ExitKind};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    /// Stages that have completed in this run directory. Timings go to the
    /// log only so that reruns produce a byte-identical manifest.
    pub stages: BTreeSet<String>,
    /// SHA-256 of every other file in the run directory.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    /// Loads a manifest; the recorded `out` is resolved to the manifest's
    /// directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::config("manifest", format!("{}: {e}", path.display())))?;
        let mut manifest: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::config("manifest", format!("{}: {e}", path.display())))?;
        if manifest.config.out == Path::new(".") {
            manifest.config.out = match path.parent() {
                Some(dir) if !dir.as_os_str().is_empty() => dir.to_path_buf(),
                _ => PathBuf::from("."),
            };
        }
        Ok(manifest)
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Hashes of every regular file in `dir` except the manifest itself.
pub fn hash_tree(dir: &Path) -> std::io::Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == MANIFEST || !entry.file_type()?.is_file() {
            continue;
        }
        files.insert(name, sha256_file(&entry.path())?);
    }
    Ok(files)
}

/// Rewrites the manifest with the current config, the completed stages and
/// fresh hashes.
pub fn update(dir: &Path, config: &PipelineConfig, completed: &[String]) -> CliResult<RunManifest> {
    let path = dir.join(MANIFEST);
    let mut stages = fs::read_to_string(&path)
        .ok()
        .and_then(|text| serde_json::from_str::<RunManifest>(&text).ok())
        .map(|m| m.stages)
        .unwrap_or_default();
    stages.extend(completed.iter().cloned());
    let internal = |e: std::io::Error| CliError::new(ExitKind::Internal, "manifest", e.to_string());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        // The run directory is wherever the manifest lives.
        config: PipelineConfig {
            out: PathBuf::from("."),
            ..config.clone()
        },
        stages,
        files: hash_tree(dir).map_err(internal)?,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::new(ExitKind::Internal, "manifest", e.to_string()))?;
    fs::write(&path, json + "\n").map_err(internal)?;
    Ok(manifest)
}
