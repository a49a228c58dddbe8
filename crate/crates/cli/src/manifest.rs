use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

/// Record of one invocation, written before any heavy computation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub scenario: Option<String>,
    pub out_dir: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// `sha256("blob <len>\0" + inputs)` over the arguments and input files.
    pub input_hash: String,
    pub args: BTreeMap<String, String>,
}

/// Content hash in the style of a git blob id, with SHA-256.
pub fn blob_hash(payload: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", payload.len()).as_bytes());
    h.update(payload);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct ManifestBuilder {
    subcommand: String,
    args: BTreeMap<String, String>,
    files: Vec<(String, Vec<u8>)>,
    scenario: Option<String>,
    seed: Option<u64>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        ManifestBuilder {
            subcommand: subcommand.into(),
            args: BTreeMap::new(),
            files: Vec::new(),
            scenario: None,
            seed: None,
        }
    }

    pub fn arg(mut self, key: &str, value: impl ToString) -> Self {
        self.args.insert(key.into(), value.to_string());
        self
    }

    pub fn opt_arg<T: ToString>(self, key: &str, value: Option<T>) -> Self {
        match value {
            Some(v) => self.arg(key, v),
            None => self,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self.arg("seed", seed)
    }

    /// Reads an input file into the hash.
    pub fn input_file(mut self, role: &str, path: &Path) -> Result<Self, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
        if role == "scenario" || role == "data" {
            self.scenario = Some(path.display().to_string());
        }
        self.files.push((role.into(), bytes));
        Ok(self)
    }

    fn hash(&self) -> String {
        let mut payload = Vec::new();
        payload.extend_from_slice(self.subcommand.as_bytes());
        payload.push(0);
        for (k, v) in &self.args {
            payload.extend_from_slice(format!("{k}={v}").as_bytes());
            payload.push(0);
        }
        for (role, bytes) in &self.files {
            payload.extend_from_slice(format!("{role}:{}", bytes.len()).as_bytes());
            payload.push(0);
            payload.extend_from_slice(bytes);
        }
        blob_hash(&payload)
    }

    /// Creates the output directory (`runs/<subcommand>-<hash>` unless given)
    /// and writes `manifest.json` into it.
    pub fn write(self, out: Option<&Path>) -> Result<(RunManifest, PathBuf), Failure> {
        let hash = self.hash();
        let dir = match out {
            Some(p) => p.to_path_buf(),
            None => PathBuf::from("runs").join(format!("{}-{}", self.subcommand, &hash[..12])),
        };
        fs::create_dir_all(&dir).map_err(|e| Failure::validation(format!("{}: {e}", dir.display())))?;
        let manifest = RunManifest {
            subcommand: self.subcommand,
            scenario: self.scenario,
            out_dir: dir.display().to_string(),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            input_hash: hash,
            args: self.args,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok((manifest, dir))
    }
}
