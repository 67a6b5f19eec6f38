//! Run manifests: everything needed to replay a run bit for bit, given the
//! reply cache and the input files.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::BackendConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// The invocation, argv[0] included, verbatim.
    pub command_line: Vec<String>,
    pub toolkit_version: String,
    /// Seedable-generator algorithm identifier (see `permute::GENERATOR_ID`).
    pub generator: String,
    /// Resolved backend configuration, decoding parameters included.
    pub backend: BackendConfig,
    /// Separate judge backend when a command uses one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judge_backend: Option<BackendConfig>,
    pub max_inflight: usize,
    /// Named seeds (base seed plus any derived conventions worth recording).
    pub seeds: BTreeMap<String, u64>,
    /// Command-specific parameters (n_perms, metric, grid, ...).
    pub parameters: BTreeMap<String, String>,
    /// SHA-256 of every input file consumed by the run.
    pub input_hashes: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn new(backend: BackendConfig) -> Self {
        RunManifest {
            command_line: std::env::args().collect(),
            toolkit_version: crate::TOOLKIT_VERSION.to_string(),
            generator: crate::permute::GENERATOR_ID.to_string(),
            backend,
            judge_backend: None,
            max_inflight: 1,
            seeds: BTreeMap::new(),
            parameters: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            started_at: now(),
            finished_at: String::new(),
        }
    }

    pub fn record_input(&mut self, path: impl AsRef<Path>) -> io::Result<()> {
        let path = path.as_ref();
        let hash = sha256_file(path)?;
        self.input_hashes
            .insert(path.display().to_string(), hash);
        Ok(())
    }

    pub fn finish(&mut self) {
        self.finished_at = now();
    }

    pub fn write(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, format!("{json}\n"))
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn sha256_file(path: impl AsRef<Path>) -> io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_and_hashes_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("input.txt");
        std::fs::write(&input, "payload").unwrap();

        let mut manifest = RunManifest::new(BackendConfig::synthetic("ascending"));
        manifest.record_input(&input).unwrap();
        manifest.seeds.insert("base".to_string(), 7);
        manifest.finish();

        let path = dir.path().join("run.manifest.json");
        manifest.write(&path).unwrap();
        let reloaded: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(reloaded.seeds["base"], 7);
        assert_eq!(reloaded.generator, "chacha8");
        let (_, hash) = reloaded.input_hashes.iter().next().unwrap();
        assert_eq!(hash, &sha256_file(&input).unwrap());
        assert!(!reloaded.started_at.is_empty());
        assert!(!reloaded.finished_at.is_empty());
    }
}
