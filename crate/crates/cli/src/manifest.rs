use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use topicrefine::refine::RefinementSummary;

use crate::config::RunConfig;

/// Token usage copied from the refinement summary, which sums the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub completion_calls: usize,
    pub retries: usize,
    pub topics: usize,
    pub failed_topics: usize,
    pub total_prompt_tokens: u64,
    pub total_completion_tokens: u64,
    pub avg_prompt_tokens_per_topic: f64,
    pub avg_completion_tokens_per_topic: f64,
}

impl From<&RefinementSummary> for TokenUsage {
    fn from(s: &RefinementSummary) -> Self {
        TokenUsage {
            completion_calls: s.completion_calls,
            retries: s.retries,
            topics: s.num_topics,
            failed_topics: s.failed_topics.len(),
            total_prompt_tokens: s.total_prompt_tokens,
            total_completion_tokens: s.total_completion_tokens,
            avg_prompt_tokens_per_topic: s.avg_prompt_tokens_per_topic,
            avg_completion_tokens_per_topic: s.avg_completion_tokens_per_topic,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Milliseconds since the Unix epoch; omitted in deterministic runs.
    pub started_unix_ms: Option<u128>,
    pub finished_unix_ms: Option<u128>,
    pub config: RunConfig,
    pub stages: BTreeMap<String, Value>,
    pub token_usage: Option<TokenUsage>,
    pub outputs: Vec<PathBuf>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn start(config: &RunConfig) -> Self {
        RunManifest {
            tool: "topicrefine".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: config.command.clone(),
            started_unix_ms: (!config.deterministic).then(now_ms),
            finished_unix_ms: None,
            config: config.clone(),
            stages: BTreeMap::new(),
            token_usage: None,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        if !self.config.deterministic {
            self.finished_unix_ms = Some(now_ms());
        }
        self.outputs.sort();
    }
}
