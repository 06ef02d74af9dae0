//! Output directory bookkeeping and the run manifest.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes artifacts below the output directory and remembers them.
pub struct Output {
    dir: PathBuf,
    written: BTreeSet<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Output {
            dir: dir.to_path_buf(),
            written: BTreeSet::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let err = |source| CliError::Output {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(err)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(err)?);
        f(&mut w).and_then(|_| w.flush()).map_err(err)?;
        log::info!("wrote {}", path.display());
        self.written.insert(path.clone());
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write(name, |w| w.write_all(text.as_bytes()))
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, path: PathBuf) {
        self.written.insert(path);
    }

    /// Manifest key for a path: relative to the output directory when
    /// inside it, else as given.
    fn key(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.dir).ok().map(Path::to_path_buf).or_else(|| {
            let (p, d) = (path.canonicalize().ok()?, self.dir.canonicalize().ok()?);
            p.strip_prefix(d).ok().map(Path::to_path_buf)
        });
        match rel {
            Some(r) => r.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            None => path.display().to_string(),
        }
    }

    fn checksums<'p>(&self, paths: impl IntoIterator<Item = &'p PathBuf>) -> Result<Map<String, Value>, CliError> {
        let mut m = Map::new();
        for p in paths {
            m.insert(self.key(p), Value::String(sha256_file(p)?));
        }
        Ok(m)
    }

    /// Writes `manifest.json`: command, version, seed, the settings and
    /// their hash, and checksums of inputs and artifacts. Nothing in it
    /// depends on the output location or the time of the run.
    pub fn write_manifest(&mut self, command: &str, cfg: &RunConfig, inputs: &[PathBuf]) -> Result<PathBuf, CliError> {
        let settings: Map<String, Value> = cfg
            .settings()
            .into_iter()
            .map(|(k, v)| (k, Value::String(v)))
            .collect();
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "config": settings,
            "config_sha256": cfg.hash(),
            "inputs": self.checksums(inputs)?,
            "artifacts": self.checksums(self.written.iter())?,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut f = File::open(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut h = Sha256::new();
    std::io::copy(&mut f, &mut h).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(h.finalize()))
}
