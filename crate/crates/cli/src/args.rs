//! Command-line flags. Every value is optional so that unset flags leave the
//! config-file or default value in place.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use topicrefine::llm::BackendKind;
use topicrefine::refine::ContextMode;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "topicrefine", version, about = "Refine topic-model topics by replacing intruder words")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit LDA by collapsed Gibbs sampling and write the top words per topic.
    Lda(LdaArgs),
    /// Replace intruder words in a topic set using a language model.
    Refine(RefineArgs),
    /// Score a topic set: NPMI, UCI, S, D and per-word NPMI.
    Eval(EvalArgs),
    /// Downstream label prediction from topic distributions.
    Classify(ClassifyArgs),
    /// lda -> refine -> eval -> classify on one corpus.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lda(_) => "lda",
            Command::Refine(_) => "refine",
            Command::Eval(_) => "eval",
            Command::Classify(_) => "classify",
            Command::Pipeline(_) => "pipeline",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Lda(a) => &a.common,
            Command::Refine(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Pipeline(a) => &a.common,
        }
    }

    /// Overlays every flag that was given onto `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.command = self.name().to_string();
        self.common().apply(cfg);
        let inputs = &mut cfg.inputs;
        match self {
            Command::Lda(a) => {
                set(&mut inputs.corpus, &a.corpus);
                set(&mut inputs.labels, &a.labels);
                a.preprocess.apply(cfg);
                a.lda.apply(cfg);
            }
            Command::Refine(a) => {
                set(&mut inputs.topics, &a.topics);
                set(&mut inputs.vocab, &a.vocab);
                set(&mut inputs.embeddings, &a.embeddings);
                a.llm.apply(cfg);
            }
            Command::Eval(a) => {
                set(&mut inputs.topics, &a.topics);
                set(&mut inputs.baseline, &a.baseline);
                set(&mut inputs.reference, &a.reference);
                set(&mut inputs.embeddings, &a.embeddings);
                a.metrics.apply(cfg);
            }
            Command::Classify(a) => {
                set(&mut inputs.corpus, &a.corpus);
                set(&mut inputs.labels, &a.labels);
                set(&mut inputs.topics, &a.topics);
                set(&mut inputs.embeddings, &a.embeddings);
                set(&mut inputs.doc_embeddings, &a.doc_embeddings);
                a.classify.apply(cfg);
            }
            Command::Pipeline(a) => {
                set(&mut inputs.corpus, &a.corpus);
                set(&mut inputs.labels, &a.labels);
                set(&mut inputs.embeddings, &a.embeddings);
                set(&mut inputs.reference, &a.reference);
                a.preprocess.apply(cfg);
                a.lda.apply(cfg);
                a.llm.apply(cfg);
                a.metrics.apply(cfg);
                a.classify.apply(cfg);
            }
        }
    }
}

fn set<T: Clone>(target: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        target.clone_from(flag);
    }
}

fn set_value<T: Clone>(target: &mut T, flag: &Option<T>) {
    if let Some(v) = flag {
        *target = v.clone();
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized stage [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Topic-level workers [default: logical cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Single worker and no timestamps, for byte-identical reruns.
    #[arg(long)]
    pub deterministic: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl CommonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_value(&mut cfg.seed, &self.seed);
        set_value(&mut cfg.jobs, &self.jobs);
        cfg.deterministic |= self.deterministic;
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// File of stopwords, whitespace separated.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Drop words found in fewer documents [default: 5].
    #[arg(long)]
    pub min_doc_freq: Option<usize>,
    /// Drop words found in a larger fraction of documents [default: 0.5].
    #[arg(long)]
    pub max_doc_freq_ratio: Option<f64>,
    /// Drop shorter tokens [default: 1].
    #[arg(long)]
    pub min_token_len: Option<usize>,
    /// Keep the original letter case.
    #[arg(long)]
    pub no_lowercase: bool,
}

impl PreprocessArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.preprocess;
        set(&mut p.stopwords, &self.stopwords);
        set_value(&mut p.min_doc_freq, &self.min_doc_freq);
        set_value(&mut p.max_doc_freq_ratio, &self.max_doc_freq_ratio);
        set_value(&mut p.min_token_len, &self.min_token_len);
        if self.no_lowercase {
            p.lowercase = false;
        }
    }
}

#[derive(Debug, Args)]
pub struct LdaFlags {
    /// Number of topics [default: 20].
    #[arg(long = "k", visible_alias = "num-topics")]
    pub num_topics: Option<usize>,
    /// Gibbs sweeps [default: 1000].
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Document-topic prior [default: 50/K].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Topic-word prior [default: 0.01].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Words per topic [default: 10].
    #[arg(long)]
    pub top_n: Option<usize>,
}

impl LdaFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        let l = &mut cfg.lda;
        set_value(&mut l.num_topics, &self.num_topics);
        set_value(&mut l.iterations, &self.iterations);
        set(&mut l.alpha, &self.alpha);
        set(&mut l.beta, &self.beta);
        set_value(&mut l.top_n, &self.top_n);
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum BackendFlag {
    Remote,
    Mock,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ContextFlag {
    Original,
    Refined,
}

#[derive(Debug, Args)]
pub struct LlmFlags {
    /// Completion backend [default: mock].
    #[arg(long, value_enum)]
    pub backend: Option<BackendFlag>,
    /// Model identifier sent to the remote backend.
    #[arg(long)]
    pub model: Option<String>,
    /// Sampling temperature [default: 0].
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Retries on transient backend failures [default: 3].
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Per-request timeout in seconds [default: 60].
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Response cache directory [default: $TOPICREFINE_CACHE_DIR].
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Prompt context for later positions [default: original].
    #[arg(long, value_enum)]
    pub context: Option<ContextFlag>,
    /// Mock coherence threshold on mean cosine [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Fresh completions after an unparseable answer [default: 2].
    #[arg(long)]
    pub parse_retries: Option<u32>,
}

impl LlmFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(b) = self.backend {
            cfg.llm.backend = match b {
                BackendFlag::Remote => BackendKind::Remote,
                BackendFlag::Mock => BackendKind::Mock,
            };
        }
        if let Some(c) = self.context {
            cfg.refine.context = match c {
                ContextFlag::Original => ContextMode::Original,
                ContextFlag::Refined => ContextMode::Refined,
            };
        }
        set_value(&mut cfg.llm.model_id, &self.model);
        set_value(&mut cfg.llm.temperature, &self.temperature);
        set_value(&mut cfg.llm.max_retries, &self.max_retries);
        set_value(&mut cfg.llm.timeout_secs, &self.timeout);
        set(&mut cfg.llm.cache_dir, &self.cache_dir);
        set_value(&mut cfg.refine.threshold, &self.threshold);
        set_value(&mut cfg.refine.parse_retries, &self.parse_retries);
    }
}

#[derive(Debug, Args)]
pub struct MetricFlags {
    /// Co-occurrence window in tokens; 0 means whole documents [default: 10].
    #[arg(long)]
    pub window: Option<usize>,
    /// Smoothing inside joint-probability logarithms [default: 1e-12].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl MetricFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set_value(&mut cfg.metrics.window, &self.window);
        set_value(&mut cfg.metrics.epsilon, &self.epsilon);
    }
}

#[derive(Debug, Args)]
pub struct ClassifyFlags {
    /// Fraction of each label used for training [default: 0.8].
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// SVM epochs [default: 200].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// SVM regularization constant C [default: 1.0].
    #[arg(long)]
    pub svm_c: Option<f64>,
}

impl ClassifyFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set_value(&mut cfg.classify.train_fraction, &self.train_fraction);
        set_value(&mut cfg.classify.epochs, &self.epochs);
        set_value(&mut cfg.classify.svm_c, &self.svm_c);
    }
}

#[derive(Debug, Args)]
pub struct LdaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Corpus file, one document per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Labels file aligned with the corpus by line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub lda: LdaFlags,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Topic-set file, one topic per line.
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Vocabulary file, one word per line.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Word vectors, `word v1 v2 ...` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub llm: LlmFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Topic set to compare against (e.g. before refinement).
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Reference corpus for co-occurrence counts.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub metrics: MetricFlags,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Precomputed document vectors, one line per document.
    #[arg(long)]
    pub doc_embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub classify: ClassifyFlags,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Reference corpus for coherence [default: the input corpus].
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub lda: LdaFlags,
    #[command(flatten)]
    pub llm: LlmFlags,
    #[command(flatten)]
    pub metrics: MetricFlags,
    #[command(flatten)]
    pub classify: ClassifyFlags,
}
