use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// Files written by one run, removed again if the run fails.
pub struct Outputs {
    root: PathBuf,
    created: Vec<PathBuf>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    core_version: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a RunConfig,
    outputs: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Outputs {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        let mut out = Self {
            root: root.to_path_buf(),
            created: Vec::new(),
            files: Vec::new(),
        };
        out.make_dir(root)?;
        Ok(out)
    }

    fn make_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        fs::create_dir_all(dir)
            .map_err(|e| CliError::config("out", format!("cannot create {}: {e}", dir.display())))?;
        self.created.extend(missing.into_iter().rev());
        Ok(())
    }

    /// Registers `rel` and returns its absolute location.
    pub fn path(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            let parent = parent.to_path_buf();
            self.make_dir(&parent)?;
        }
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
        Ok(p)
    }

    pub fn write<F>(&mut self, rel: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let p = self.path(rel)?;
        let mut w = BufWriter::new(File::create(&p)?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.json` listing every output with its digest.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<(), CliError> {
        let hashed = config.hashed();
        let config_sha256 = sha256_hex(serde_json::to_string(&hashed)?.as_bytes());
        let mut outputs = Vec::new();
        for rel in &self.files {
            let bytes = fs::read(self.root.join(rel))?;
            outputs.push(ManifestEntry {
                path: rel.clone(),
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            core_version: dialign::VERSION,
            seed: config.seed()?,
            config_sha256,
            config: &hashed,
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        let p = self.path("manifest.json")?;
        fs::write(p, text + "\n")?;
        self.files.clear();
        self.created.clear();
        Ok(())
    }

    /// Removes everything this run wrote.
    pub fn abort(self) {
        for rel in &self.files {
            let _ = fs::remove_file(self.root.join(rel));
        }
        for d in self.created.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}
