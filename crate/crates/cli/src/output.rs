//! Output files with embedded provenance: a `#` comment line for CSV, a
//! `provenance` object for JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        Self { config_sha256: hex::encode(Sha256::digest(config_bytes)), seed }
    }

    pub fn comment(&self) -> String {
        format!("# entanglab {VERSION} config_sha256={} seed={}", self.config_sha256, self.seed)
    }

    fn value(&self) -> Value {
        json!({ "tool": "entanglab", "version": VERSION, "config_sha256": self.config_sha256, "seed": self.seed })
    }
}

pub struct Sink {
    pub dir: PathBuf,
    pub stem: String,
    pub provenance: Provenance,
}

impl Sink {
    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)
            .map_err(|source| CliError::Io { context: format!("creating {}", self.dir.display()), source })?;
        fs::write(path, bytes)
            .map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source })?;
        Ok(path.to_path_buf())
    }

    /// `body` starts with its header row.
    pub fn csv(&self, body: &str) -> Result<PathBuf, CliError> {
        let text = format!("{}\n{body}", self.provenance.comment());
        self.write(&self.path("csv"), text.as_bytes())
    }

    pub fn json(&self, payload: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut value = serde_json::to_value(payload).map_err(entanglab::Error::from)?;
        match &mut value {
            Value::Object(map) => {
                map.insert("provenance".into(), self.provenance.value());
            }
            other => {
                value = json!({ "provenance": self.provenance.value(), "data": other.take() });
            }
        }
        let mut text = serde_json::to_string_pretty(&value).map_err(entanglab::Error::from)?;
        text.push('\n');
        self.write(&self.path("json"), text.as_bytes())
    }

    pub fn bytes(&self, ext: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        self.write(&self.path(ext), bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
