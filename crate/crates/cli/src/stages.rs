//! The work behind each subcommand. Every stage writes its artifacts
//! atomically under its output directory and returns a summary for the
//! run manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use topicrefine::classify::{load_doc_embeddings, run_classification, ClassificationOutcome};
use topicrefine::corpus::{load_stopwords, read_raw_corpus, read_reference_corpus, tokenize, CorpusStats};
use topicrefine::fsutil::write_atomic;
use topicrefine::lda::{fit_gibbs_lda, LdaParams};
use topicrefine::llm::{BackendKind, CompletionBackend, LlmClient, MockOracle, RemoteBackend};
use topicrefine::metrics::{build_cooccurrence, delta_report, evaluate_topics, per_word_csv};
use topicrefine::refine::{refine_topic_set, RefineOptions, RefinementSummary};
use topicrefine::{load_embeddings, load_topic_set, save_topic_set, Corpus, Document, Embeddings, Error, Result, TopicSet, Vocabulary};

use crate::config::{require, RunConfig};

/// Files written by a stage, relative to the run's output root.
pub type Outputs = Vec<PathBuf>;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub struct Writer<'a> {
    pub root: &'a Path,
    pub dir: PathBuf,
    pub outputs: Outputs,
}

impl<'a> Writer<'a> {
    pub fn new(root: &'a Path, sub: &str) -> Self {
        Writer {
            root,
            dir: if sub.is_empty() { root.to_path_buf() } else { root.join(sub) },
            outputs: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.strip_prefix(self.root).unwrap_or(&p).to_path_buf());
        p
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        write_atomic(&p, text.as_bytes())
    }

    pub fn topics(&mut self, name: &str, topics: &TopicSet) -> Result<()> {
        let p = self.path(name);
        save_topic_set(topics, &p)
    }
}

pub struct LdaOutput {
    pub topics: TopicSet,
    pub vocabulary: Vocabulary,
    pub summary: Value,
}

pub fn lda(cfg: &RunConfig, w: &mut Writer) -> Result<LdaOutput> {
    let corpus_path = require(&cfg.inputs.corpus, "corpus")?;
    let raw = read_raw_corpus(corpus_path, cfg.inputs.labels.as_deref())?;
    let corpus = topicrefine::preprocess_corpus(&raw, &cfg.preprocess)?;
    let mut params = LdaParams::<f64>::with_defaults(cfg.lda.num_topics, cfg.lda.iterations, cfg.seed);
    if let Some(a) = cfg.lda.alpha {
        params.alpha = a;
    }
    if let Some(b) = cfg.lda.beta {
        params.beta = b;
    }
    log::info!(
        "fitting LDA: {} documents, {} words, K={}",
        corpus.stats.doc_count,
        corpus.vocabulary.len(),
        params.num_topics
    );
    let state = fit_gibbs_lda(&corpus, params)?;
    let topics = state.top_words(cfg.lda.top_n)?;

    w.topics("topics.txt", &topics)?;
    w.text("vocab.txt", &corpus.vocabulary.to_dump())?;
    let run = json!({
        "params": params,
        "top_n": cfg.lda.top_n,
        "corpus": corpus.stats,
        "vocabulary_size": corpus.vocabulary.len(),
        "log_likelihood": state.log_likelihood.iter().map(|&(sweep, ll)| json!({"sweep": sweep, "value": ll})).collect::<Vec<_>>(),
    });
    w.json("lda_run.json", &run)?;
    let summary = json!({
        "num_topics": topics.len(),
        "words_per_topic": topics.words_per_topic(),
        "documents": corpus.stats.doc_count,
        "vocabulary_size": corpus.vocabulary.len(),
        "final_log_likelihood": state.log_likelihood.last().map(|&(_, ll)| ll),
    });
    Ok(LdaOutput {
        topics,
        vocabulary: corpus.vocabulary,
        summary,
    })
}

pub fn load_store(cfg: &RunConfig) -> Result<Embeddings> {
    load_embeddings::<f64>(require(&cfg.inputs.embeddings, "embeddings")?, None)
}

fn backend(cfg: &RunConfig, vocabulary: &Vocabulary, store: &Arc<Embeddings>) -> Result<Arc<dyn CompletionBackend>> {
    Ok(match cfg.llm.backend {
        BackendKind::Mock => Arc::new(MockOracle::new(
            Arc::clone(store),
            Arc::new(vocabulary.clone()),
            cfg.refine.threshold,
        )?),
        BackendKind::Remote => Arc::new(RemoteBackend::from_env(&cfg.llm)?),
    })
}

pub struct RefineOutput {
    pub topics: TopicSet,
    pub summary: RefinementSummary,
}

pub fn refine(
    cfg: &RunConfig,
    topics: &TopicSet,
    vocabulary: &Vocabulary,
    store: &Arc<Embeddings>,
    w: &mut Writer,
) -> Result<RefineOutput> {
    let unknown: usize = topics.topics().iter().flatten().filter(|t| !vocabulary.contains(t)).count();
    if unknown > 0 {
        log::warn!("{unknown} topic words are not in the vocabulary");
    }
    let client = LlmClient::new(backend(cfg, vocabulary, store)?, cfg.llm.clone())?;
    log::info!("refining {} topics with {}", topics.len(), client.describe());
    let options = RefineOptions {
        context: cfg.refine.context,
        parse_retries: cfg.refine.parse_retries,
        jobs: cfg.jobs,
    };
    let outcome = refine_topic_set(topics, vocabulary, store, &client, &options)?;

    w.topics("topics.txt", &outcome.topics)?;
    let mut lines = String::new();
    for r in &outcome.records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    w.text("records.jsonl", &lines)?;
    w.json("summary.json", &outcome.summary)?;
    Ok(RefineOutput {
        topics: outcome.topics,
        summary: outcome.summary,
    })
}

pub fn eval(
    cfg: &RunConfig,
    topics: &TopicSet,
    baseline: Option<&TopicSet>,
    store: &Embeddings,
    w: &mut Writer,
) -> Result<Value> {
    let reference = require(&cfg.inputs.reference, "reference")?;
    let docs = read_reference_corpus(reference, cfg.preprocess.lowercase)?;
    let mut targets: Vec<&String> = topics.topics().iter().flatten().collect();
    if let Some(b) = baseline {
        targets.extend(b.topics().iter().flatten());
    }
    let stats = build_cooccurrence(&docs, cfg.metrics.window, &targets)?.with_epsilon(cfg.metrics.epsilon);
    let report = evaluate_topics(topics, &stats, store)?;
    w.json("quality.json", &report)?;
    w.text("per_word_npmi.csv", &per_word_csv(&report.per_word_npmi))?;
    let mut summary = json!({ "aggregate": report.aggregate });
    if let Some(b) = baseline {
        let before = evaluate_topics(b, &stats, store)?;
        let delta = delta_report(&before, &report)?;
        w.json("baseline_quality.json", &before)?;
        w.json("delta.json", &delta)?;
        w.text("delta.md", &delta.to_markdown(&before, &report))?;
        summary["baseline_aggregate"] = json!(before.aggregate);
        summary["delta"] = json!(delta);
    }
    Ok(summary)
}

/// Tokenizes every line without frequency filtering, so documents stay
/// aligned with labels and precomputed document vectors.
fn labeled_corpus(cfg: &RunConfig) -> Result<Corpus> {
    let corpus_path = require(&cfg.inputs.corpus, "corpus")?;
    let labels = require(&cfg.inputs.labels, "labels")?;
    let raw = read_raw_corpus(corpus_path, Some(labels))?;
    let stopwords = match &cfg.preprocess.stopwords {
        Some(p) => load_stopwords(p)?,
        None => HashSet::new(),
    };
    let documents: Vec<Document> = raw
        .into_iter()
        .enumerate()
        .map(|(i, (text, label))| Document {
            id: i.to_string(),
            tokens: tokenize(&text, cfg.preprocess.lowercase)
                .into_iter()
                .filter(|t| t.chars().count() >= cfg.preprocess.min_token_len && !stopwords.contains(t))
                .collect(),
            label,
        })
        .collect();
    if documents.is_empty() {
        return Err(Error::DegenerateCorpus("no documents to classify".into()));
    }
    let total: usize = documents.iter().map(|d| d.tokens.len()).sum();
    let stats = CorpusStats {
        doc_count: documents.len(),
        label_count: documents
            .iter()
            .filter_map(|d| d.label.as_deref())
            .collect::<HashSet<_>>()
            .len(),
        avg_length: total as f64 / documents.len() as f64,
    };
    Ok(Corpus {
        documents,
        vocabulary: Vocabulary::default(),
        stats,
    })
}

pub struct Classifier {
    corpus: Corpus,
    doc_embeddings: Option<Vec<Vec<f64>>>,
}

impl Classifier {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let corpus = labeled_corpus(cfg)?;
        let doc_embeddings = cfg.inputs.doc_embeddings.as_deref().map(load_doc_embeddings::<f64>).transpose()?;
        Ok(Classifier { corpus, doc_embeddings })
    }

    pub fn run(&self, cfg: &RunConfig, topics: &TopicSet, store: &Embeddings) -> Result<ClassificationOutcome> {
        run_classification(
            &self.corpus,
            topics,
            store,
            self.doc_embeddings.as_deref(),
            cfg.seed,
            cfg.classify.train_fraction,
            &cfg.svm_params(),
        )
    }
}

pub fn load_topics(path: &Option<PathBuf>, flag: &str) -> Result<TopicSet> {
    load_topic_set(require(path, flag)?)
}

pub fn load_vocabulary(cfg: &RunConfig) -> Result<Vocabulary> {
    Vocabulary::load(require(&cfg.inputs.vocab, "vocab")?)
}
