//! Output directory handling: atomic writes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gridstorm::sha256_hex;
use serde::Serialize;

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

/// Command inputs and outputs, hashed for provenance.
#[derive(Debug, Default, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Non-path options that shaped the run.
    pub options: BTreeMap<String, String>,
    /// Input role → SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub grid_hash: Option<String>,
    /// Output file name → SHA-256.
    pub outputs: BTreeMap<String, String>,
}

/// Collects output files for one command run.
pub struct OutputDir {
    dir: Option<PathBuf>,
    pub manifest: Manifest,
}

impl OutputDir {
    pub fn new(dir: Option<&Path>, command: &str, seed: Option<u64>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).with_context(|| format!("creating output directory {}", d.display()))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            manifest: Manifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                ..Manifest::default()
            },
        })
    }

    pub fn option(&mut self, key: &str, value: impl ToString) {
        self.manifest.options.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, role: &str, bytes: &[u8]) {
        self.manifest.inputs.insert(role.to_string(), sha256_hex(bytes));
    }

    /// Writes one output file (no-op without an output directory).
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            write_atomic(&d.join(name), bytes)?;
            self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        }
        Ok(())
    }

    /// Writes `manifest.json` last.
    pub fn finish(self) -> Result<()> {
        if let Some(d) = &self.dir {
            let mut doc = serde_json::to_vec_pretty(&self.manifest)?;
            doc.push(b'\n');
            write_atomic(&d.join("manifest.json"), &doc)?;
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut doc = serde_json::to_vec_pretty(value).expect("serializable");
    doc.push(b'\n');
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::new(Some(dir.path()), "simulate", Some(3)).unwrap();
        out.write("x.csv", b"k\n").unwrap();
        out.finish().unwrap();
        let m: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["seed"], 3);
        assert_eq!(m["outputs"]["x.csv"], sha256_hex(b"k\n"));
    }
}
