//! Run manifest: one JSON file naming every artifact of a simulation
//! run with its digest, so downstream analysis can prove it is looking
//! at the inputs and log the run actually produced.
//!
//! Paths inside a manifest are relative to the manifest's directory;
//! the whole run directory can be moved or archived and still verify.
//! Manifests carry no timestamps, so re-running with the same seed and
//! inputs reproduces them byte for byte.

use crate::config::SimulationConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Read;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the manifest file.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub backend: String,
    pub config: SimulationConfig,
    pub personas: FileEntry,
    pub graph: FileEntry,
    pub stories: FileEntry,
    pub log: FileEntry,
    /// Where analysis writes its report, relative to the manifest. Not
    /// hashed: the report does not exist until analysis runs.
    pub report_path: String,
    /// Content-state digest at the end of the run; must match the log
    /// footer and any replay.
    pub final_state_sha256: String,
    pub turns: u64,
    pub records: u64,
    pub backend_calls: u64,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported manifest format version {0} (expected {MANIFEST_FORMAT_VERSION})")]
    FormatVersion(u32),
    #[error("{role} file {path} does not match its recorded digest")]
    HashMismatch { role: &'static str, path: String },
    #[error("{role} file {path}: {source}")]
    FileUnreadable { role: &'static str, path: String, source: std::io::Error },
}

/// Streaming SHA-256 of a file's bytes, as lowercase hex.
pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Build an entry for `path`, recorded relative to `base`.
pub fn file_entry(base: &Path, path: &Path) -> std::io::Result<FileEntry> {
    let rel = path.strip_prefix(base).unwrap_or(path);
    Ok(FileEntry { path: rel.to_string_lossy().into_owned(), sha256: sha256_file(path)? })
}

impl RunManifest {
    pub fn files(&self) -> [(&'static str, &FileEntry); 4] {
        [
            ("personas", &self.personas),
            ("graph", &self.graph),
            ("stories", &self.stories),
            ("log", &self.log),
        ]
    }

    pub fn resolve(&self, base: &Path, entry: &FileEntry) -> PathBuf {
        base.join(&entry.path)
    }

    /// Recompute every digest against the files on disk.
    pub fn verify(&self, base: &Path) -> Result<(), ManifestError> {
        for (role, entry) in self.files() {
            let path = self.resolve(base, entry);
            let actual = sha256_file(&path).map_err(|source| ManifestError::FileUnreadable {
                role,
                path: entry.path.clone(),
                source,
            })?;
            if actual != entry.sha256 {
                return Err(ManifestError::HashMismatch { role, path: entry.path.clone() });
            }
        }
        Ok(())
    }
}

pub fn write_manifest_file(path: &Path, manifest: &RunManifest) -> Result<(), ManifestError> {
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_manifest_file(path: &Path) -> Result<RunManifest, ManifestError> {
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if manifest.format_version != MANIFEST_FORMAT_VERSION {
        return Err(ManifestError::FormatVersion(manifest.format_version));
    }
    Ok(manifest)
}

/// Read a manifest and verify every referenced file, returning the
/// manifest and its base directory.
pub fn load_verified(path: &Path) -> Result<(RunManifest, PathBuf), ManifestError> {
    let manifest = read_manifest_file(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    manifest.verify(&base)?;
    Ok((manifest, base))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dir: &Path) -> RunManifest {
        let roles = ["personas", "graph", "stories", "log"];
        let mut entries = Vec::new();
        for role in roles {
            let path = dir.join(format!("{role}.dat"));
            std::fs::write(&path, format!("{role} bytes\n")).unwrap();
            entries.push(file_entry(dir, &path).unwrap());
        }
        RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: 42,
            backend: "mock".into(),
            config: SimulationConfig::new(42, 1.0),
            personas: entries[0].clone(),
            graph: entries[1].clone(),
            stories: entries[2].clone(),
            log: entries[3].clone(),
            report_path: "report.json".into(),
            final_state_sha256: "0".repeat(64),
            turns: 10,
            records: 12,
            backend_calls: 15,
        }
    }

    #[test]
    fn sha256_file_matches_known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x");
        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn roundtrip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = sample(dir.path());
        let path = dir.path().join("manifest.json");
        write_manifest_file(&path, &manifest).unwrap();
        let (back, base) = load_verified(&path).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(base, dir.path());
    }

    #[test]
    fn edited_artifact_fails_verification_by_role() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = sample(dir.path());
        std::fs::write(dir.path().join("graph.dat"), "tampered\n").unwrap();
        match manifest.verify(dir.path()) {
            Err(ManifestError::HashMismatch { role: "graph", .. }) => {}
            other => panic!("expected graph hash mismatch, got {other:?}"),
        }
    }

    #[test]
    fn missing_artifact_is_reported_with_its_role() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = sample(dir.path());
        std::fs::remove_file(dir.path().join("log.dat")).unwrap();
        match manifest.verify(dir.path()) {
            Err(ManifestError::FileUnreadable { role: "log", .. }) => {}
            other => panic!("expected unreadable log, got {other:?}"),
        }
    }

    #[test]
    fn wrong_format_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = sample(dir.path());
        manifest.format_version = 99;
        let path = dir.path().join("manifest.json");
        write_manifest_file(&path, &manifest).unwrap();
        assert!(matches!(read_manifest_file(&path), Err(ManifestError::FormatVersion(99))));
    }

    #[test]
    fn manifests_are_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = sample(dir.path());
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        write_manifest_file(&a, &manifest).unwrap();
        write_manifest_file(&b, &manifest).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}
