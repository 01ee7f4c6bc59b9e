//! Atomic file emission and the content-hash manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub study: String,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Writes `data` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(data).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Single writer for one output directory.
pub struct OutputDir {
    pub root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    /// Prepares `root`: files listed by a previous manifest are removed;
    /// any other file makes the directory unusable.
    pub fn prepare(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let manifest_path = root.join(MANIFEST);
        let mut owned: Vec<String> = Vec::new();
        if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
            let old: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: manifest_path.clone(),
                message: e.to_string(),
            })?;
            owned = old.files.into_iter().map(|e| e.path).collect();
            owned.push(MANIFEST.to_string());
        }
        let listing = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        let mut names = Vec::new();
        for entry in listing {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
        let foreign: Vec<&String> = names.iter().filter(|n| !owned.contains(n)).collect();
        if !foreign.is_empty() {
            return Err(Error::Parse {
                path: root.to_path_buf(),
                message: format!("output directory contains files not produced by a previous run: {foreign:?}"),
            });
        }
        for n in &names {
            let p = root.join(n);
            fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(OutputDir { root: root.to_path_buf(), entries: Vec::new() })
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), data)?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            bytes: data.len() as u64,
            sha256: sha256_hex(data),
        });
        Ok(())
    }

    pub fn finish(mut self, study: &str) -> Result<Manifest> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let m = Manifest { study: study.to_string(), files: self.entries };
        write_atomic(&self.root.join(MANIFEST), m.to_json().as_bytes())?;
        Ok(m)
    }
}
