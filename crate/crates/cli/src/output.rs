//! Output directory with a run lock, staged writes and a manifest.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const LOCK_NAME: &str = ".wavinv.lock";
pub const MANIFEST_NAME: &str = "manifest.json";
const PARTIAL_SUFFIX: &str = ".partial";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub status: &'static str,
    pub config_hash: String,
    pub config: &'a std::collections::BTreeMap<String, String>,
    pub inputs: &'a [FileRecord],
    pub outputs: &'a [FileRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<serde_json::Value>,
    pub created_unix: u64,
}

/// Exclusive handle on an output directory. Outputs are staged as
/// `<name>.partial` and renamed only when the whole run succeeded.
pub struct OutputDir {
    dir: PathBuf,
    staged: Vec<(String, FileRecord)>,
    committed: bool,
}

impl OutputDir {
    pub fn lock(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let lock = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!(
                    "output directory {} is locked by another run (remove {} if that run is gone)",
                    dir.display(),
                    lock.display()
                )
            }
            Err(e) => return Err(e).with_context(|| format!("creating {}", lock.display())),
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
            committed: false,
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes `bytes` to `<name>.partial`.
    pub fn stage(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let partial = self.dir.join(format!("{name}{PARTIAL_SUFFIX}"));
        let mut f =
            File::create(&partial).with_context(|| format!("writing {}", partial.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        self.staged.push((
            name.to_string(),
            FileRecord {
                file: name.to_string(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            },
        ));
        Ok(())
    }

    pub fn records(&self) -> Vec<FileRecord> {
        self.staged.iter().map(|s| s.1.clone()).collect()
    }

    /// Renames every staged file into place.
    pub fn commit(&mut self) -> Result<()> {
        for (name, _) in &self.staged {
            let from = self.dir.join(format!("{name}{PARTIAL_SUFFIX}"));
            fs::rename(&from, self.dir.join(name))
                .with_context(|| format!("renaming {}", from.display()))?;
        }
        self.committed = true;
        Ok(())
    }

    /// Removes staged files after a failure.
    pub fn discard(&mut self) {
        for (name, _) in self.staged.drain(..) {
            let _ = fs::remove_file(self.dir.join(format!("{name}{PARTIAL_SUFFIX}")));
        }
    }

    pub fn write_manifest(&self, manifest: &Manifest<'_>) -> Result<()> {
        let text = serde_json::to_vec_pretty(manifest)?;
        let partial = self.dir.join(format!("{MANIFEST_NAME}{PARTIAL_SUFFIX}"));
        fs::write(&partial, text)?;
        fs::rename(&partial, self.dir.join(MANIFEST_NAME))?;
        Ok(())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.committed {
            self.discard();
        }
        let _ = fs::remove_file(self.dir.join(LOCK_NAME));
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lock_is_refused() {
        let tmp = tempfile::tempdir().unwrap();
        let first = OutputDir::lock(tmp.path()).unwrap();
        assert!(OutputDir::lock(tmp.path()).is_err());
        drop(first);
        assert!(OutputDir::lock(tmp.path()).is_ok());
    }

    #[test]
    fn uncommitted_stages_are_removed() {
        let tmp = tempfile::tempdir().unwrap();
        {
            let mut out = OutputDir::lock(tmp.path()).unwrap();
            out.stage("a.csv", b"x\n").unwrap();
            assert!(tmp.path().join("a.csv.partial").exists());
        }
        assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
    }

    #[test]
    fn commit_renames() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::lock(tmp.path()).unwrap();
        out.stage("a.csv", b"x\n").unwrap();
        out.commit().unwrap();
        drop(out);
        assert_eq!(fs::read(tmp.path().join("a.csv")).unwrap(), b"x\n");
        assert!(!tmp.path().join(LOCK_NAME).exists());
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
