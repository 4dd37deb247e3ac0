use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    subcommand: &'a str,
    config_sha256: String,
    config: &'a C,
    seeds: Seeds,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

#[derive(Serialize)]
struct Seeds {
    seed: u64,
}

/// Collects the artifacts of one subcommand run and its manifest.
pub struct Run {
    out_dir: PathBuf,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Run {
    pub fn new(out_dir: PathBuf) -> Self {
        Run {
            out_dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Reads an input file and records its digest.
    pub fn input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| statute_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let key = path.display().to_string();
        if !self.inputs.iter().any(|d| d.path == key) {
            self.inputs.push(FileDigest {
                path: key,
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(bytes)
    }

    pub fn input_text(&mut self, path: &Path) -> Result<String> {
        String::from_utf8(self.input(path)?).map_err(|e| {
            statute_core::Error::Parse {
                location: path.display().to_string(),
                message: e.to_string(),
            }
            .into()
        })
    }

    /// Writes `name` under the output directory.
    pub fn output(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let bytes = bytes.as_ref();
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Writes `manifest_<subcommand>_<config hash prefix>.json` and returns
    /// the output names.
    pub fn finish<C: Serialize>(mut self, subcommand: &str, config: &C, seed: u64) -> Result<Vec<String>> {
        let config_json = serde_json::to_vec(config)?;
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let names = self.outputs.iter().map(|d| d.path.clone()).collect();
        let config_sha256 = sha256_hex(&config_json);
        let file = format!("manifest_{subcommand}_{}.json", &config_sha256[..12]);
        let manifest = Manifest {
            subcommand,
            config_sha256,
            config,
            seeds: Seeds { seed },
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.out_dir.join(file), text.as_bytes())?;
        Ok(names)
    }
}
