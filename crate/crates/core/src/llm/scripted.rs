use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{estimate_tokens, CompletionBackend, CompletionResult};
use crate::error::Result;
use crate::refine::{parse_prompt, LlmVerdict};

/// Replays fixed verdicts keyed by the held-out word; any other word is
/// judged coherent under `default_topic`.
pub struct ScriptedBackend {
    verdicts: HashMap<String, LlmVerdict>,
    default_topic: String,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(default_topic: impl Into<String>) -> Self {
        ScriptedBackend {
            verdicts: HashMap::new(),
            default_topic: default_topic.into(),
            calls: AtomicUsize::new(0),
        }
    }

    /// Answers "Yes" to everything.
    pub fn always_yes() -> Self {
        Self::new("topic")
    }

    pub fn with(mut self, held_out: impl Into<String>, verdict: LlmVerdict) -> Self {
        self.verdicts.insert(held_out.into(), verdict);
        self
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionBackend for ScriptedBackend {
    fn complete(&self, prompt: &str) -> Result<CompletionResult> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let (_, held_out) = parse_prompt(prompt)?;
        let text = self
            .verdicts
            .get(&held_out)
            .cloned()
            .unwrap_or_else(|| LlmVerdict::yes(self.default_topic.clone()))
            .to_json();
        Ok(CompletionResult {
            prompt_tokens: estimate_tokens(prompt),
            completion_tokens: estimate_tokens(&text),
            text,
            cached: false,
        })
    }

    fn describe(&self) -> String {
        format!("scripted verdicts={}", self.verdicts.len())
    }
}
