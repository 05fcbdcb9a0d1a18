//! Post-processing of topic-model output with a language model.
//!
//! Each topic word is put to a completion backend together with the rest of
//! its topic; words judged inconsistent are swapped for a vocabulary word.
//! The crate also carries the pieces needed to run and score that process
//! end to end: corpus preprocessing, a Gibbs-sampled LDA baseline, static
//! word vectors, coherence (NPMI/UCI) and embedding granularity metrics, and
//! a linear-SVM classification probe.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix it to `f64`.

pub mod classify;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod fsutil;
pub mod lda;
pub mod llm;
pub mod metrics;
pub mod refine;
pub mod scalar;
pub mod synthetic;
pub mod topics;

pub use corpus::{preprocess_corpus, Corpus, Document, PreprocessConfig, Vocabulary};
pub use embeddings::{cosine_similarity, load_embeddings, nearest_in_vocab_by_avg_similarity, EmbeddingStore};
pub use error::{Error, ErrorClass, Result};
pub use lda::{fit_gibbs_lda, LdaParams, LdaState};
pub use llm::{CompletionBackend, CompletionResult, LlmClient, LlmConfig};
pub use refine::{refine_topic, refine_topic_set, RefineOptions, RefinementRecord};
pub use scalar::Real;
pub use topics::{load_topic_set, save_topic_set, TopicSet};

pub type Embeddings = EmbeddingStore<f64>;
pub type Embeddings32 = EmbeddingStore<f32>;
pub type Lda = LdaState<f64>;
pub type MockLlm = llm::MockOracle<f64>;
pub type Quality = metrics::QualityReport<f64>;
