//! Chat-completion backends behind a common trait.
//!
//! Every prompt in the toolkit (judging, translation, baseline scoring,
//! conlang generation) goes through [`CompletionBackend::complete`]. The
//! remote strategy speaks the OpenAI-compatible wire format; synthetic
//! strategies answer deterministically for offline tests and hermetic runs.
//! Strategies are registered by name and selected at runtime through
//! [`BackendConfig`]: `backend_kind = synthetic_oracle` looks the `model_id`
//! up in the registry.
//!
//! [`Backend`] wraps a strategy with the shared reply cache, retry policy,
//! and offline enforcement.

mod cache;
mod oracle;
mod pool;
mod remote;

pub use cache::ReplyCache;
pub use oracle::{AlwaysFirst, AscendingOracle, GarbageReplies};
pub use pool::run_indexed;
pub use remote::{RemoteChat, API_KEY_ENV, DEFAULT_ENDPOINT, ENDPOINT_ENV};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {message}")]
    Http { status: u16, message: String },
    #[error("missing credentials: set the {0} environment variable")]
    MissingCredentials(&'static str),
    #[error("offline mode: cache miss for key {key}")]
    OfflineCacheMiss { key: String },
    #[error("unknown synthetic strategy '{name}'; available: {available}")]
    UnknownStrategy { name: String, available: String },
    #[error("cache I/O: {0}")]
    Cache(#[from] std::io::Error),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("prompt not supported by strategy '{strategy}': {message}")]
    Unsupported {
        strategy: &'static str,
        message: String,
    },
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
}

impl BackendError {
    /// Transport failures are worth retrying; everything else is not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

/// One completion call: a single user prompt for a named model.
pub struct CompletionRequest<'a> {
    pub model_id: &'a str,
    pub prompt: &'a str,
    pub params: &'a BTreeMap<String, serde_json::Value>,
}

/// A chat-completion strategy. Implementations must be deterministic for
/// deterministic inputs unless they proxy a remote service.
pub trait CompletionBackend: Send + Sync {
    /// Strategy identifier recorded in run manifests.
    fn id(&self) -> &'static str;

    fn is_remote(&self) -> bool {
        false
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    RemoteChat,
    SyntheticOracle,
}

/// Backend selection plus the knobs shared by every command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub backend_kind: BackendKind,
    /// Remote model id, or the synthetic strategy name for oracle backends.
    pub model_id: String,
    /// Chat-completions endpoint; empty selects the environment variable or
    /// the built-in default.
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub cache_dir: Option<PathBuf>,
    /// Decoding parameters merged verbatim into the request body; empty means
    /// the backend's own defaults.
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    /// Forbid network use; remote calls must be served from the cache.
    #[serde(default)]
    pub offline: bool,
}

impl BackendConfig {
    pub fn synthetic(strategy: &str) -> Self {
        BackendConfig {
            backend_kind: BackendKind::SyntheticOracle,
            model_id: strategy.to_string(),
            endpoint: String::new(),
            timeout_ms: 120_000,
            max_retries: 2,
            cache_dir: None,
            params: BTreeMap::new(),
            offline: false,
        }
    }

    pub fn remote(model_id: &str) -> Self {
        BackendConfig {
            backend_kind: BackendKind::RemoteChat,
            model_id: model_id.to_string(),
            ..BackendConfig::synthetic("")
        }
    }
}

type StrategyFactory = fn() -> Box<dyn CompletionBackend>;

/// Synthetic strategies selectable by name when `backend_kind` is
/// `synthetic_oracle`.
pub const ORACLE_STRATEGIES: &[(&str, StrategyFactory)] = &[
    ("ascending", || Box::new(AscendingOracle)),
    ("always-first", || Box::new(AlwaysFirst)),
    ("garbage", || Box::new(GarbageReplies)),
];

pub fn create_oracle(name: &str) -> Result<Box<dyn CompletionBackend>, BackendError> {
    for (key, factory) in ORACLE_STRATEGIES {
        if *key == name {
            return Ok(factory());
        }
    }
    Err(BackendError::UnknownStrategy {
        name: name.to_string(),
        available: ORACLE_STRATEGIES
            .iter()
            .map(|(k, _)| *k)
            .collect::<Vec<_>>()
            .join(", "),
    })
}

/// A ready-to-use backend: strategy plus cache, retry, and offline policy.
pub struct Backend {
    inner: Box<dyn CompletionBackend>,
    model_id: String,
    params: BTreeMap<String, serde_json::Value>,
    cache: Option<ReplyCache>,
    max_retries: u32,
    offline: bool,
    backoff_base: Duration,
}

impl Backend {
    pub fn from_config(cfg: &BackendConfig) -> Result<Self, BackendError> {
        let inner: Box<dyn CompletionBackend> = match cfg.backend_kind {
            BackendKind::RemoteChat => Box::new(RemoteChat::from_config(cfg)?),
            BackendKind::SyntheticOracle => create_oracle(&cfg.model_id)?,
        };
        Backend::from_parts(inner, cfg)
    }

    /// Wrap an arbitrary strategy (test doubles included) with the shared
    /// cache/retry policy from `cfg`.
    pub fn from_parts(
        inner: Box<dyn CompletionBackend>,
        cfg: &BackendConfig,
    ) -> Result<Self, BackendError> {
        if cfg.timeout_ms == 0 {
            return Err(BackendError::InvalidConfig(
                "timeout must be positive".to_string(),
            ));
        }
        let cache = match &cfg.cache_dir {
            Some(dir) => Some(ReplyCache::open(dir)?),
            None => None,
        };
        let backoff_base = if inner.is_remote() {
            Duration::from_millis(250)
        } else {
            Duration::ZERO
        };
        Ok(Backend {
            inner,
            model_id: cfg.model_id.clone(),
            params: cfg.params.clone(),
            cache,
            max_retries: cfg.max_retries,
            offline: cfg.offline,
            backoff_base,
        })
    }

    pub fn strategy_id(&self) -> &'static str {
        self.inner.id()
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn is_remote(&self) -> bool {
        self.inner.is_remote()
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    pub fn cache_key(&self, prompt: &str) -> String {
        ReplyCache::key(&self.model_id, prompt, &self.params)
    }

    /// Complete a prompt, serving from the cache when possible and writing
    /// fresh replies back to it.
    pub fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let key = self.cache_key(prompt);
        if let Some(cache) = &self.cache {
            if let Some(reply) = cache.get(&key) {
                return Ok(reply);
            }
        }
        self.complete_skipping_cache_read(prompt, &key)
    }

    /// Complete a prompt without consulting the cache (used when a cached
    /// reply failed to parse and the caller wants a fresh sample); the new
    /// reply still overwrites the cache entry.
    pub fn complete_uncached(&self, prompt: &str) -> Result<String, BackendError> {
        let key = self.cache_key(prompt);
        self.complete_skipping_cache_read(prompt, &key)
    }

    fn complete_skipping_cache_read(
        &self,
        prompt: &str,
        key: &str,
    ) -> Result<String, BackendError> {
        if self.offline && self.inner.is_remote() {
            return Err(BackendError::OfflineCacheMiss {
                key: key.to_string(),
            });
        }
        let request = CompletionRequest {
            model_id: &self.model_id,
            prompt,
            params: &self.params,
        };
        let mut attempt = 0u32;
        let reply = loop {
            match self.inner.complete(&request) {
                Ok(reply) => break reply,
                Err(e) if e.is_retryable() && attempt < self.max_retries => {
                    if !self.backoff_base.is_zero() {
                        let backoff = self.backoff_base * 2u32.saturating_pow(attempt).min(32);
                        std::thread::sleep(backoff.min(Duration::from_secs(5)));
                    }
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if let Some(cache) = &self.cache {
            cache.put(key, self.inner.id(), &self.model_id, &reply)?;
        }
        Ok(reply)
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::{Arc, Mutex};

    /// Replies with a fixed string and counts invocations through a shared
    /// counter the test keeps a handle to.
    pub struct CountingBackend {
        pub reply: String,
        pub calls: Arc<AtomicUsize>,
    }

    impl CountingBackend {
        pub fn new(reply: &str) -> (Self, Arc<AtomicUsize>) {
            let calls = Arc::new(AtomicUsize::new(0));
            (
                CountingBackend {
                    reply: reply.to_string(),
                    calls: Arc::clone(&calls),
                },
                calls,
            )
        }
    }

    impl CompletionBackend for CountingBackend {
        fn id(&self) -> &'static str {
            "counting"
        }
        fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, BackendError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.reply.clone())
        }
    }

    /// Pops scripted replies in order; errors when the script runs dry.
    pub struct ScriptedBackend {
        replies: Mutex<Vec<String>>,
    }

    impl ScriptedBackend {
        pub fn new(replies: Vec<&str>) -> Self {
            let mut replies: Vec<String> = replies.into_iter().map(String::from).collect();
            replies.reverse();
            ScriptedBackend {
                replies: Mutex::new(replies),
            }
        }
    }

    impl CompletionBackend for ScriptedBackend {
        fn id(&self) -> &'static str {
            "scripted"
        }
        fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, BackendError> {
            self.replies
                .lock()
                .unwrap()
                .pop()
                .ok_or_else(|| BackendError::Transport("script exhausted".to_string()))
        }
    }
}
