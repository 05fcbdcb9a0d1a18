//! Topic quality: NPMI/UCI coherence against a reference corpus, embedding
//! granularity (S, D), per-word NPMI matrices and before/after deltas.

mod coherence;
mod cooccurrence;
mod granularity;
mod report;

pub use coherence::{npmi_pair, per_word_npmi_matrix, pmi_pair, scoreable_words, topic_npmi, topic_uci};
pub use cooccurrence::{build_cooccurrence, build_cooccurrence_from_corpus, CooccurrenceStats, DEFAULT_EPSILON};
pub use granularity::{between_topic_distance, topic_within_similarity, within_topic_similarity};
pub use report::{delta_report, evaluate_topics, per_word_csv, AggregateQuality, DeltaReport, QualityReport, TopicQuality};

/// Default sliding-window width for coherence counting.
pub const DEFAULT_WINDOW: usize = 10;
