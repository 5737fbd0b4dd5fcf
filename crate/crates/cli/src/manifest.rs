use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use demix_core::io::{read_json_value, write_json};
use demix_core::RngSeed;
use serde::{Deserialize, Serialize};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Everything needed to rerun a command: the arguments as given, their
/// parsed form, every seed used and the files written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, RngSeed>,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, config: &impl Serialize) -> anyhow::Result<Self> {
        Ok(Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            argv,
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn seed(&mut self, name: &str, seed: RngSeed) -> &mut Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    pub fn artifact(&mut self, path: &Path) -> &mut Self {
        self.artifacts.push(path.to_path_buf());
        self
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        write_json(path, self).with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let doc = read_json_value(path)?;
        serde_json::from_value(doc).with_context(|| format!("reading manifest {}", path.display()))
    }
}

/// Manifest location for a command whose main output is a single file:
/// `result.json` gets `result.manifest.json`.
pub fn beside(out: &Path) -> PathBuf {
    out.with_extension(MANIFEST_NAME)
}

/// Drops `--threads N` / `--threads=N` from an argument list.
pub fn strip_threads(argv: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--threads" {
            it.next();
        } else if !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}
