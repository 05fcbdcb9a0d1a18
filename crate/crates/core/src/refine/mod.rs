//! Topic refinement: one prompt per (topic, word), processed from the least
//! relevant word to the most relevant, retaining or replacing each word
//! according to the model's verdict.

mod prompt;
mod verdict;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::embeddings::{nearest_in_vocab_by_avg_similarity, EmbeddingStore};
use crate::error::{Error, Result};
use crate::llm::LlmClient;
use crate::scalar::Real;
use crate::topics::TopicSet;

pub use prompt::{build_prompt, parse_prompt, PromptInstance, TEMPLATE};
pub use verdict::{extract_first_json_object, parse_response, Coherence, LlmVerdict, MAX_ALTERNATIVES};

/// Which word list supplies the prompt context for later positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextMode {
    /// The unmodified input topic, for every position.
    #[default]
    Original,
    /// The working copy, including replacements made so far.
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementSource {
    Retained,
    CandidateInVocab,
    FallbackNearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub topic_index: usize,
    /// 1-based position in the topic.
    pub position: usize,
    pub original_word: String,
    pub prompt: String,
    pub verdict: LlmVerdict,
    pub replacement: Option<String>,
    pub replacement_source: ReplacementSource,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Extra completion attempts spent on unparseable answers.
    pub retries: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineOptions {
    pub context: ContextMode,
    /// Fresh completions requested after an unparseable or off-schema answer.
    pub parse_retries: u32,
    /// Topics refined concurrently; 1 means strictly sequential.
    pub jobs: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            context: ContextMode::Original,
            parse_retries: 2,
            jobs: 1,
        }
    }
}

/// Picks the first generated candidate that is in the vocabulary and not
/// already in the topic; otherwise the vocabulary word closest on average to
/// all candidates.
pub fn select_alternative<T: Real, S: AsRef<str>>(
    candidates: &[S],
    vocabulary: &Vocabulary,
    current_topic_words: &HashSet<String>,
    store: &EmbeddingStore<T>,
) -> Result<(String, ReplacementSource)> {
    if candidates.is_empty() {
        return Err(Error::Contract("no candidate words to choose from".into()));
    }
    if let Some(c) = candidates
        .iter()
        .map(AsRef::as_ref)
        .find(|c| vocabulary.contains(c) && !current_topic_words.contains(*c))
    {
        return Ok((c.to_string(), ReplacementSource::CandidateInVocab));
    }
    let w = nearest_in_vocab_by_avg_similarity(candidates, vocabulary, current_topic_words, store)?;
    Ok((w, ReplacementSource::FallbackNearest))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicRefinement {
    pub refined: Vec<String>,
    /// In processing order: position N first.
    pub records: Vec<RefinementRecord>,
}

fn ask(client: &LlmClient, prompt: &str, parse_retries: u32) -> Result<(LlmVerdict, u64, u64, u32)> {
    let mut prompt_tokens = 0;
    let mut completion_tokens = 0;
    let mut attempt = 0u32;
    loop {
        let result = if attempt == 0 {
            client.complete(prompt)?
        } else {
            client.complete_fresh(prompt)?
        };
        prompt_tokens += result.prompt_tokens;
        completion_tokens += result.completion_tokens;
        match parse_response(&result.text) {
            Ok(v) => return Ok((v, prompt_tokens, completion_tokens, attempt)),
            Err(e @ (Error::ResponseParse(_) | Error::ResponseSchema(_))) if attempt < parse_retries => {
                log::warn!("discarding malformed answer: {e}");
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn refine_topic<T: Real>(
    topic_index: usize,
    topic: &[String],
    vocabulary: &Vocabulary,
    store: &EmbeddingStore<T>,
    client: &LlmClient,
    options: &RefineOptions,
) -> Result<TopicRefinement> {
    let wrap = |e: Error| Error::TopicFailed {
        topic_index,
        source: Box::new(e),
    };
    if topic.len() < 2 {
        return Err(wrap(Error::Contract("a topic needs at least two words".into())));
    }
    let distinct: HashSet<&String> = topic.iter().collect();
    if distinct.len() != topic.len() {
        return Err(wrap(Error::Contract("topic words are not distinct".into())));
    }

    let mut working = topic.to_vec();
    let mut records = Vec::with_capacity(topic.len());
    for j in (0..topic.len()).rev() {
        let source = match options.context {
            ContextMode::Original => topic,
            ContextMode::Refined => &working,
        };
        let held_out = &working[j];
        let context: Vec<&String> = source.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, w)| w).collect();
        let mut prompt = build_prompt(&context, held_out).map_err(wrap)?;
        prompt.topic_index = topic_index;
        prompt.position = j + 1;

        let (verdict, prompt_tokens, completion_tokens, retries) =
            ask(client, &prompt.text, options.parse_retries).map_err(wrap)?;

        let (replacement, replacement_source) = match verdict.coherent {
            Coherence::Yes => (None, ReplacementSource::Retained),
            Coherence::No => {
                let current: HashSet<String> = working.iter().cloned().collect();
                let (w, src) = select_alternative(&verdict.alternatives, vocabulary, &current, store).map_err(wrap)?;
                (Some(w), src)
            }
        };
        records.push(RefinementRecord {
            topic_index,
            position: j + 1,
            original_word: working[j].clone(),
            prompt: prompt.text,
            verdict,
            replacement: replacement.clone(),
            replacement_source,
            prompt_tokens,
            completion_tokens,
            retries,
        });
        if let Some(w) = replacement {
            working[j] = w;
        }
    }
    Ok(TopicRefinement {
        refined: working,
        records,
    })
}

/// Re-applies recorded replacements to `topic`.
pub fn replay_records(topic: &[String], records: &[RefinementRecord]) -> Vec<String> {
    let mut out = topic.to_vec();
    for r in records {
        if let Some(w) = &r.replacement {
            out[r.position - 1] = w.clone();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicFailure {
    pub topic_index: usize,
    pub error_code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSummary {
    pub num_topics: usize,
    pub words_per_topic: usize,
    pub context: ContextMode,
    pub completion_calls: usize,
    pub retries: usize,
    pub word_changes: Vec<usize>,
    pub total_word_changes: usize,
    pub prompt_tokens_per_topic: Vec<u64>,
    pub completion_tokens_per_topic: Vec<u64>,
    pub total_prompt_tokens: u64,
    pub total_completion_tokens: u64,
    /// Averages over successfully refined topics.
    pub avg_prompt_tokens_per_topic: f64,
    pub avg_completion_tokens_per_topic: f64,
    pub failed_topics: Vec<TopicFailure>,
}

#[derive(Debug, Clone)]
pub struct RefinementOutcome {
    pub topics: TopicSet,
    /// Ordered by (topic index, processing order).
    pub records: Vec<RefinementRecord>,
    pub summary: RefinementSummary,
}

pub fn summarize(
    topics: &TopicSet,
    results: &[std::result::Result<TopicRefinement, TopicFailure>],
    context: ContextMode,
) -> RefinementSummary {
    let mut word_changes = Vec::with_capacity(results.len());
    let mut pt = Vec::with_capacity(results.len());
    let mut ct = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    let mut calls = 0usize;
    let mut retries = 0usize;
    for r in results {
        match r {
            Ok(t) => {
                word_changes.push(t.records.iter().filter(|r| r.replacement.is_some()).count());
                pt.push(t.records.iter().map(|r| r.prompt_tokens).sum());
                ct.push(t.records.iter().map(|r| r.completion_tokens).sum());
                calls += t.records.len();
                retries += t.records.iter().map(|r| r.retries as usize).sum::<usize>();
            }
            Err(f) => {
                word_changes.push(0);
                pt.push(0);
                ct.push(0);
                failed.push(f.clone());
            }
        }
    }
    let ok = (results.len() - failed.len()).max(1) as f64;
    let total_pt: u64 = pt.iter().sum();
    let total_ct: u64 = ct.iter().sum();
    RefinementSummary {
        num_topics: topics.len(),
        words_per_topic: topics.words_per_topic(),
        context,
        completion_calls: calls,
        retries,
        total_word_changes: word_changes.iter().sum(),
        word_changes,
        prompt_tokens_per_topic: pt,
        completion_tokens_per_topic: ct,
        total_prompt_tokens: total_pt,
        total_completion_tokens: total_ct,
        avg_prompt_tokens_per_topic: total_pt as f64 / ok,
        avg_completion_tokens_per_topic: total_ct as f64 / ok,
        failed_topics: failed,
    }
}

/// Refines every topic. Failed topics keep their input words and are listed
/// in the summary; the call fails only when no topic succeeds.
pub fn refine_topic_set<T: Real>(
    topics: &TopicSet,
    vocabulary: &Vocabulary,
    store: &EmbeddingStore<T>,
    client: &LlmClient,
    options: &RefineOptions,
) -> Result<RefinementOutcome> {
    let run = |i: usize| {
        refine_topic(i, topics.topic(i), vocabulary, store, client, options).map_err(|e| TopicFailure {
            topic_index: i,
            error_code: e.code().to_string(),
            message: e.to_string(),
        })
    };
    let results: Vec<_> = if options.jobs <= 1 {
        (0..topics.len()).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..topics.len()).into_par_iter().map(run).collect())
    };

    if results.iter().all(|r| r.is_err()) {
        for f in results.iter().filter_map(|r| r.as_ref().err()) {
            log::error!("topic {}: {}", f.topic_index, f.message);
        }
        return Err(Error::AllTopicsFailed(topics.len()));
    }

    let summary = summarize(topics, &results, options.context);
    let mut refined = Vec::with_capacity(topics.len());
    let mut records = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => {
                refined.push(t.refined);
                records.extend(t.records);
            }
            Err(_) => refined.push(topics.topic(i).to_vec()),
        }
    }
    let provenance = format!("{} | refined ({:?} context)", topics.provenance, options.context);
    Ok(RefinementOutcome {
        topics: TopicSet::new(refined, provenance)?,
        records,
        summary,
    })
}
