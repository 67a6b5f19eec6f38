//! Flag/config/environment resolution.
//!
//! Precedence: command-line flags, then the TOML config file, then
//! environment variables, then built-in defaults. The resolved values are
//! snapshotted into the run manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use shuffleval::backend::{BackendConfig, BackendKind};

use crate::CliError;

pub const DEFAULT_TIMEOUT_MS: u64 = 120_000;
pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const DEFAULT_MAX_INFLIGHT: usize = 8;

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Backend strategy: `remote` (chat-completions API) or `oracle`
    /// (deterministic synthetic strategies; the model id selects one).
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Chat-completions endpoint (overrides SHUFFLEVAL_ENDPOINT).
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub timeout_ms: Option<u64>,
    #[arg(long, global = true)]
    pub max_retries: Option<u32>,
    /// Reply cache directory; every remote call is keyed and replayable.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Forbid network use; remote calls must hit the cache.
    #[arg(long, global = true)]
    pub offline: bool,
    /// Bounded worker pool for backend calls.
    #[arg(long, global = true)]
    pub max_inflight: Option<usize>,
    /// TOML config file (flags still win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    #[serde(default)]
    pub backend: FileBackend,
    #[serde(default)]
    pub defaults: FileDefaults,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileBackend {
    pub kind: Option<String>,
    pub endpoint: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub cache_dir: Option<PathBuf>,
    pub max_inflight: Option<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileDefaults {
    pub model: Option<String>,
    pub judge_model: Option<String>,
    pub n_perms: Option<usize>,
    pub seed: Option<u64>,
}

/// Backend flags and config file merged, ready to instantiate per model id.
#[derive(Debug, Clone)]
pub struct ResolvedBackend {
    pub kind: BackendKind,
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
    pub max_inflight: usize,
    pub params: BTreeMap<String, serde_json::Value>,
    pub file_defaults: FileDefaults,
}

impl ResolvedBackend {
    pub fn config_for(&self, model_id: &str) -> BackendConfig {
        BackendConfig {
            backend_kind: self.kind,
            model_id: model_id.to_string(),
            endpoint: self.endpoint.clone(),
            timeout_ms: self.timeout_ms,
            max_retries: self.max_retries,
            cache_dir: self.cache_dir.clone(),
            params: self.params.clone(),
            offline: self.offline,
        }
    }
}

fn toml_to_json(value: &toml::Value) -> serde_json::Value {
    match value {
        toml::Value::String(s) => serde_json::Value::String(s.clone()),
        toml::Value::Integer(i) => serde_json::Value::from(*i),
        toml::Value::Float(f) => serde_json::Value::from(*f),
        toml::Value::Boolean(b) => serde_json::Value::Bool(*b),
        toml::Value::Datetime(d) => serde_json::Value::String(d.to_string()),
        toml::Value::Array(items) => {
            serde_json::Value::Array(items.iter().map(toml_to_json).collect())
        }
        toml::Value::Table(table) => serde_json::Value::Object(
            table
                .iter()
                .map(|(k, v)| (k.clone(), toml_to_json(v)))
                .collect(),
        ),
    }
}

pub fn resolve_backend(args: &BackendArgs) -> Result<ResolvedBackend, CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("config file {}: {e}", path.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let kind_name = args
        .backend
        .clone()
        .or_else(|| file.backend.kind.clone())
        .unwrap_or_else(|| "remote".to_string());
    let kind = match kind_name.as_str() {
        "remote" => BackendKind::RemoteChat,
        "oracle" => BackendKind::SyntheticOracle,
        other => {
            return Err(CliError::Config(format!(
                "unknown backend '{other}' (expected 'remote' or 'oracle')"
            )))
        }
    };

    let params = file
        .backend
        .params
        .iter()
        .map(|(k, v)| (k.clone(), toml_to_json(v)))
        .collect();

    Ok(ResolvedBackend {
        kind,
        endpoint: args
            .endpoint
            .clone()
            .or_else(|| file.backend.endpoint.clone())
            .unwrap_or_default(),
        timeout_ms: args
            .timeout_ms
            .or(file.backend.timeout_ms)
            .unwrap_or(DEFAULT_TIMEOUT_MS),
        max_retries: args
            .max_retries
            .or(file.backend.max_retries)
            .unwrap_or(DEFAULT_MAX_RETRIES),
        cache_dir: args.cache_dir.clone().or(file.backend.cache_dir.clone()),
        offline: args.offline,
        max_inflight: args
            .max_inflight
            .or(file.backend.max_inflight)
            .unwrap_or(DEFAULT_MAX_INFLIGHT),
        params,
        file_defaults: file.defaults,
    })
}

/// Parse "1/2400" or "0.0004166" style ratio flags.
pub fn parse_ratio(raw: &str) -> Result<f64, String> {
    if let Some((num, den)) = raw.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|e| format!("{e}"))?;
        let den: f64 = den.trim().parse().map_err(|e| format!("{e}"))?;
        if den == 0.0 {
            return Err("division by zero".to_string());
        }
        Ok(num / den)
    } else {
        raw.trim().parse().map_err(|e| format!("{e}"))
    }
}

/// Parse comma-separated lists for grid flags.
pub fn parse_list<T: std::str::FromStr>(raw: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|part| part.trim().parse::<T>().map_err(|e| format!("'{part}': {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_flags_accept_fractions_and_decimals() {
        assert_eq!(parse_ratio("1/2400").unwrap(), 1.0 / 2400.0);
        assert_eq!(parse_ratio("0.25").unwrap(), 0.25);
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn list_flags_split_on_commas() {
        assert_eq!(parse_list::<usize>("16,1024").unwrap(), vec![16, 1024]);
        assert_eq!(parse_list::<f64>("0.01, 0.1").unwrap(), vec![0.01, 0.1]);
        assert!(parse_list::<usize>("16,x").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "[backend]\nkind = \"oracle\"\ntimeout_ms = 5\n[defaults]\nn_perms = 7\n",
        )
        .unwrap();
        let args = BackendArgs {
            backend: None,
            endpoint: None,
            timeout_ms: Some(99),
            max_retries: None,
            cache_dir: None,
            offline: false,
            max_inflight: None,
            config: Some(path),
        };
        let resolved = resolve_backend(&args).unwrap();
        assert_eq!(resolved.kind, BackendKind::SyntheticOracle);
        assert_eq!(resolved.timeout_ms, 99, "flag beats config");
        assert_eq!(resolved.max_retries, DEFAULT_MAX_RETRIES);
        assert_eq!(resolved.file_defaults.n_perms, Some(7));
    }
}
