use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CompletionResult, LlmConfig};
use crate::error::Result;
use crate::fsutil;

/// One file per key under `<dir>/<first two hex chars>/<hash>.json`.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    model_id: String,
    temperature: f64,
    text: String,
    prompt_tokens: u64,
    completion_tokens: u64,
}

/// SHA-256 over model id, temperature and prompt, NUL separated.
pub fn cache_key(model_id: &str, temperature: f64, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(model_id.as_bytes());
    h.update([0u8]);
    h.update(format!("{temperature:?}").as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

impl ResponseCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        ResponseCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, config: &LlmConfig, prompt: &str) -> Option<CompletionResult> {
        let path = self.path_for(&cache_key(&config.model_id, config.temperature, prompt));
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) => Some(CompletionResult {
                text: e.text,
                prompt_tokens: e.prompt_tokens,
                completion_tokens: e.completion_tokens,
                cached: true,
            }),
            Err(err) => {
                log::warn!("ignoring unreadable cache entry {}: {err}", path.display());
                None
            }
        }
    }

    pub fn put(&self, config: &LlmConfig, prompt: &str, result: &CompletionResult) -> Result<()> {
        let path = self.path_for(&cache_key(&config.model_id, config.temperature, prompt));
        let entry = Entry {
            model_id: config.model_id.clone(),
            temperature: config.temperature,
            text: result.text.clone(),
            prompt_tokens: result.prompt_tokens,
            completion_tokens: result.completion_tokens,
        };
        fsutil::write_atomic(&path, serde_json::to_string_pretty(&entry)?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_every_component() {
        let base = cache_key("m", 0.0, "p");
        assert_eq!(base.len(), 64);
        assert_ne!(base, cache_key("m2", 0.0, "p"));
        assert_ne!(base, cache_key("m", 0.5, "p"));
        assert_ne!(base, cache_key("m", 0.0, "q"));
        assert_eq!(base, cache_key("m", 0.0, "p"));
    }

    #[test]
    fn layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path());
        let cfg = LlmConfig::default();
        let r = CompletionResult {
            text: "{\"coherent\":\"Yes\"}".into(),
            prompt_tokens: 12,
            completion_tokens: 3,
            cached: false,
        };
        assert!(cache.get(&cfg, "prompt").is_none());
        cache.put(&cfg, "prompt", &r).unwrap();
        let key = cache_key(&cfg.model_id, cfg.temperature, "prompt");
        assert!(dir.path().join(&key[..2]).join(format!("{key}.json")).exists());
        let back = cache.get(&cfg, "prompt").unwrap();
        assert_eq!(back.text, r.text);
        assert_eq!((back.prompt_tokens, back.completion_tokens), (12, 3));
        assert!(back.cached);
    }
}
