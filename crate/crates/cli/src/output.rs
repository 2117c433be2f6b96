//! Output trees are written into a private staging directory next to the
//! destination and moved into place only once every file is complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub struct Staging {
    dir: PathBuf,
    target: PathBuf,
    committed: bool,
}

fn sibling(target: &Path, tag: &str) -> Result<PathBuf> {
    let name = target
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output path {} has no file name", target.display())))?;
    let parent = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    Ok(parent.join(format!(".{}.{tag}-{}", name.to_string_lossy(), std::process::id())))
}

impl Staging {
    pub fn new(target: &Path) -> Result<Self> {
        let dir = sibling(target, "staging")?;
        if let Some(parent) = dir.parent() {
            fs::create_dir_all(parent).map_err(CliError::io(parent))?;
        }
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(CliError::io(&dir))?;
        }
        fs::create_dir(&dir).map_err(CliError::io(&dir))?;
        Ok(Self { dir, target: target.to_path_buf(), committed: false })
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(CliError::io(&path))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| CliError::Json {
            path: self.dir.join(name),
            source,
        })?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Replace the destination with the staged tree.
    pub fn commit(mut self) -> Result<()> {
        let backup = sibling(&self.target, "old")?;
        let had_old = self.target.exists();
        if had_old {
            fs::rename(&self.target, &backup).map_err(CliError::io(&self.target))?;
        }
        if let Err(e) = fs::rename(&self.dir, &self.target) {
            if had_old {
                let _ = fs::rename(&backup, &self.target);
            }
            return Err(CliError::io(&self.target)(e));
        }
        self.committed = true;
        if had_old {
            if backup.is_dir() {
                fs::remove_dir_all(&backup).map_err(CliError::io(&backup))?;
            } else {
                fs::remove_file(&backup).map_err(CliError::io(&backup))?;
            }
        }
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

/// Write one file through a temporary sibling and a rename.
pub fn write_file_atomic(target: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = sibling(target, "tmp")?;
    if let Some(parent) = tmp.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, target).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(target)(e)
    })
}
