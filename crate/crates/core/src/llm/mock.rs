use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::{estimate_tokens, CompletionBackend, CompletionResult};
use crate::corpus::Vocabulary;
use crate::embeddings::{mean_cosine_to, norm, EmbeddingStore};
use crate::error::{Error, Result};
use crate::refine::{parse_prompt, LlmVerdict};
use crate::scalar::Real;

pub const MOCK_ALTERNATIVES: usize = 10;

/// Deterministic embedding-threshold stand-in for a language model.
///
/// The held-out word is judged coherent when its mean cosine similarity to
/// the context words reaches `threshold` (words without vectors are judged
/// coherent). Otherwise the ten pool words closest on average to the context
/// are proposed, ties broken by pool index.
pub struct MockOracle<T> {
    pub store: Arc<EmbeddingStore<T>>,
    pub pool: Arc<Vocabulary>,
    pub threshold: T,
    calls: AtomicUsize,
}

impl<T: Real> MockOracle<T> {
    pub fn new(store: Arc<EmbeddingStore<T>>, pool: Arc<Vocabulary>, threshold: T) -> Result<Self> {
        if !(threshold >= -T::one() && threshold <= T::one()) {
            return Err(Error::Config(format!("mock threshold must lie in [-1, 1], got {threshold}")));
        }
        Ok(MockOracle {
            store,
            pool,
            threshold,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// The closed-form decision the oracle makes for one (context, word) pair.
    pub fn verdict(&self, context: &[String], held_out: &str) -> Result<LlmVerdict> {
        let topic = context.iter().min().cloned().unwrap_or_default();
        let targets: Vec<&[T]> = context
            .iter()
            .filter_map(|w| self.store.get(w))
            .filter(|v| norm(v) > T::zero())
            .collect();
        let score = self.store.get(held_out).and_then(|v| mean_cosine_to(v, &targets));
        match score {
            None => return Ok(LlmVerdict::yes(topic)),
            Some(s) if s >= self.threshold => return Ok(LlmVerdict::yes(topic)),
            _ => {}
        }

        let mut ranked: Vec<(usize, T)> = self
            .pool
            .words()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.as_str() != held_out && !context.contains(w))
            .filter_map(|(i, w)| {
                self.store
                    .get(w)
                    .and_then(|v| mean_cosine_to(v, &targets))
                    .map(|s| (i, s))
            })
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        ranked.truncate(MOCK_ALTERNATIVES);
        if ranked.is_empty() {
            return Err(Error::Contract("mock oracle has no candidate words left in its pool".into()));
        }
        Ok(LlmVerdict::no(
            topic,
            ranked.into_iter().map(|(i, _)| self.pool.words()[i].clone()),
        ))
    }
}

pub fn mock_complete<T: Real>(prompt: &str, oracle: &MockOracle<T>) -> Result<CompletionResult> {
    let (context, held_out) = parse_prompt(prompt)?;
    let text = oracle.verdict(&context, &held_out)?.to_json();
    Ok(CompletionResult {
        prompt_tokens: estimate_tokens(prompt),
        completion_tokens: estimate_tokens(&text),
        text,
        cached: false,
    })
}

impl<T: Real> CompletionBackend for MockOracle<T> {
    fn complete(&self, prompt: &str) -> Result<CompletionResult> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        mock_complete(prompt, self)
    }

    fn describe(&self) -> String {
        format!("mock threshold={} pool={}", self.threshold, self.pool.len())
    }
}
