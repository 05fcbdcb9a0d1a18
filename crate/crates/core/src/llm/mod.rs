//! Completion backends and the client that wraps them with caching, retry and
//! token accounting.

mod cache;
mod mock;
mod remote;
mod scripted;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{cache_key, ResponseCache};
pub use mock::{mock_complete, MockOracle, MOCK_ALTERNATIVES};
pub use remote::{RemoteBackend, ENV_API_KEY, ENV_API_URL};
pub use scripted::ScriptedBackend;

pub const ENV_CACHE_DIR: &str = "TOPICREFINE_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub backend: BackendKind,
    pub model_id: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: f64,
    pub cache_dir: Option<PathBuf>,
    /// First retry delay; each later delay doubles up to `max_backoff_ms`.
    pub base_backoff_ms: u64,
    pub max_backoff_ms: u64,
    /// Upper bound on concurrently outstanding backend requests.
    pub max_in_flight: usize,
    /// Ask backends that support it for a bare JSON object.
    pub json_mode: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            backend: BackendKind::Mock,
            model_id: "gpt-3.5-turbo".to_string(),
            temperature: 0.0,
            max_retries: 3,
            timeout_secs: 60.0,
            cache_dir: None,
            base_backoff_ms: 500,
            max_backoff_ms: 8_000,
            max_in_flight: 4,
            json_mode: true,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(Error::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        if !(self.timeout_secs > 0.0) {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub cached: bool,
}

/// Offline token estimate: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

/// A single-attempt completion source. Transient failures are reported as
/// [`Error::BackendUnavailable`] and retried by [`LlmClient`].
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<CompletionResult>;

    /// Short description recorded in run metadata.
    fn describe(&self) -> String;
}

/// Delays slept before retry 1, 2, ..., `max_retries`.
pub fn backoff_delays(config: &LlmConfig) -> Vec<Duration> {
    (0..config.max_retries)
        .map(|i| {
            let ms = config
                .base_backoff_ms
                .saturating_mul(1u64.checked_shl(i).unwrap_or(u64::MAX))
                .min(config.max_backoff_ms.max(config.base_backoff_ms));
            Duration::from_millis(ms)
        })
        .collect()
}

struct Gate {
    limit: usize,
    busy: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut busy = self.busy.lock().unwrap();
        while *busy >= self.limit {
            busy = self.cv.wait(busy).unwrap();
        }
        *busy += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().unwrap() -= 1;
        self.0.cv.notify_one();
    }
}

type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

/// Shareable client: cache lookup, bounded concurrency, retry with
/// exponential backoff.
pub struct LlmClient {
    backend: Arc<dyn CompletionBackend>,
    config: LlmConfig,
    cache: Option<ResponseCache>,
    gate: Gate,
    sleeper: Sleeper,
    requests: AtomicUsize,
    cache_hits: AtomicUsize,
    retries: AtomicUsize,
}

impl LlmClient {
    pub fn new(backend: Arc<dyn CompletionBackend>, config: LlmConfig) -> Result<Self> {
        config.validate()?;
        let cache = config.cache_dir.as_ref().map(ResponseCache::new);
        Ok(LlmClient {
            backend,
            gate: Gate {
                limit: config.max_in_flight,
                busy: Mutex::new(0),
                cv: Condvar::new(),
            },
            config,
            cache,
            sleeper: Box::new(std::thread::sleep),
            requests: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
            retries: AtomicUsize::new(0),
        })
    }

    /// Replaces the sleep used between retries.
    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Box::new(sleeper);
        self
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn describe(&self) -> String {
        self.backend.describe()
    }

    /// Logical completion requests, cache hits included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits.load(Ordering::SeqCst)
    }

    pub fn retry_count(&self) -> usize {
        self.retries.load(Ordering::SeqCst)
    }

    pub fn complete(&self, prompt: &str) -> Result<CompletionResult> {
        self.complete_inner(prompt, true)
    }

    /// Skips the cache read (the fresh answer still overwrites the entry).
    pub fn complete_fresh(&self, prompt: &str) -> Result<CompletionResult> {
        self.complete_inner(prompt, false)
    }

    fn complete_inner(&self, prompt: &str, use_cache: bool) -> Result<CompletionResult> {
        if prompt.is_empty() {
            return Err(Error::Contract("empty prompt".into()));
        }
        self.requests.fetch_add(1, Ordering::SeqCst);
        if use_cache {
            if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&self.config, prompt)) {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                return Ok(hit);
            }
        }

        let delays = backoff_delays(&self.config);
        let mut attempt = 0usize;
        let result = loop {
            let outcome = {
                let _slot = self.gate.acquire();
                self.backend.complete(prompt)
            };
            match outcome {
                Err(Error::BackendUnavailable(msg)) => {
                    if attempt >= delays.len() {
                        break Err(Error::BackendUnavailable(format!(
                            "{msg} (gave up after {attempt} retries)"
                        )));
                    }
                    log::warn!("completion attempt {} failed: {msg}; retrying", attempt + 1);
                    (self.sleeper)(delays[attempt]);
                    attempt += 1;
                    self.retries.fetch_add(1, Ordering::SeqCst);
                }
                other => break other,
            }
        }?;

        if let Some(cache) = &self.cache {
            cache.put(&self.config, prompt, &result)?;
        }
        Ok(result)
    }
}
