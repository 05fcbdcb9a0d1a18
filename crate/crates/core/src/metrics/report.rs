use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::coherence::{per_word_npmi_matrix, scoreable_words, topic_npmi, topic_uci};
use super::cooccurrence::CooccurrenceStats;
use super::granularity::{between_topic_distance, topic_within_similarity};
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::topics::TopicSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TopicQuality<T> {
    /// `None` when fewer than two words occur in the reference corpus.
    pub npmi: Option<T>,
    pub uci: Option<T>,
    /// `None` when fewer than two words have embeddings.
    pub s_within: Option<T>,
    /// Words found in the reference corpus.
    pub coverage: usize,
    /// Words with embeddings.
    pub embedded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AggregateQuality<T> {
    pub npmi: Option<T>,
    pub uci: Option<T>,
    pub s: Option<T>,
    pub d: Option<T>,
    /// Slots for externally computed coherence scores.
    #[serde(default)]
    pub c_a: Option<T>,
    #[serde(default)]
    pub c_p: Option<T>,
    #[serde(default)]
    pub c_v: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QualityReport<T> {
    pub num_topics: usize,
    pub words_per_topic: usize,
    pub window: usize,
    pub per_topic: Vec<TopicQuality<T>>,
    pub aggregate: AggregateQuality<T>,
    /// K x N; `None` marks unscoreable cells.
    pub per_word_npmi: Vec<Vec<Option<T>>>,
}

fn mean_of<T: Real>(values: impl Iterator<Item = Option<T>>) -> Option<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for v in values.flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / T::of_usize(n))
}

/// Scores every topic; aggregates are means over scoreable topics, D is
/// pairwise over centroids.
pub fn evaluate_topics<T: Real>(
    topics: &TopicSet,
    stats: &CooccurrenceStats,
    store: &EmbeddingStore<T>,
) -> Result<QualityReport<T>> {
    let mut per_topic = Vec::with_capacity(topics.len());
    for (i, t) in topics.topics().iter().enumerate() {
        let coverage = scoreable_words(t, stats).len();
        let (npmi, uci) = if coverage >= 2 {
            (Some(topic_npmi::<T, _>(t, stats)?), Some(topic_uci::<T, _>(t, stats)?))
        } else {
            log::warn!("topic {i}: only {coverage} words seen in the reference corpus; coherence omitted");
            (None, None)
        };
        per_topic.push(TopicQuality {
            npmi,
            uci,
            s_within: topic_within_similarity(t, store),
            coverage,
            embedded: t.iter().filter(|w| store.contains(w)).count(),
        });
    }
    let d = match between_topic_distance(topics, store) {
        Ok(d) => Some(d),
        Err(e) => {
            log::warn!("between-topic distance omitted: {e}");
            None
        }
    };
    let aggregate = AggregateQuality {
        npmi: mean_of(per_topic.iter().map(|q| q.npmi)),
        uci: mean_of(per_topic.iter().map(|q| q.uci)),
        s: mean_of(per_topic.iter().map(|q| q.s_within)),
        d,
        c_a: None,
        c_p: None,
        c_v: None,
    };
    Ok(QualityReport {
        num_topics: topics.len(),
        words_per_topic: topics.words_per_topic(),
        window: stats.window,
        per_topic,
        aggregate,
        per_word_npmi: per_word_npmi_matrix(topics.topics(), stats)?,
    })
}

/// K rows of N comma-separated values; unscoreable cells are `NaN`.
pub fn per_word_csv<T: Real>(matrix: &[Vec<Option<T>>]) -> String {
    let mut out = String::new();
    for row in matrix {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| "NaN".to_string(), |v| v.to_string()))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DeltaReport<T> {
    pub npmi: Option<T>,
    pub uci: Option<T>,
    pub s: Option<T>,
    pub d: Option<T>,
}

fn diff<T: Real>(before: Option<T>, after: Option<T>) -> Option<T> {
    Some(after? - before?)
}

/// after - before for each aggregate metric.
pub fn delta_report<T: Real>(before: &QualityReport<T>, after: &QualityReport<T>) -> Result<DeltaReport<T>> {
    if before.num_topics != after.num_topics || before.words_per_topic != after.words_per_topic {
        return Err(Error::ReportMismatch(format!(
            "before is {}x{}, after is {}x{}",
            before.num_topics, before.words_per_topic, after.num_topics, after.words_per_topic
        )));
    }
    Ok(DeltaReport {
        npmi: diff(before.aggregate.npmi, after.aggregate.npmi),
        uci: diff(before.aggregate.uci, after.aggregate.uci),
        s: diff(before.aggregate.s, after.aggregate.s),
        d: diff(before.aggregate.d, after.aggregate.d),
    })
}

fn signed<T: Real>(v: Option<T>) -> String {
    match v {
        Some(v) if v.as_f64() >= 0.0 => format!("+{:.4}", v.as_f64().abs()),
        Some(v) => format!("-{:.4}", v.as_f64().abs()),
        None => "n/a".to_string(),
    }
}

fn plain<T: Real>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{:.4}", v.as_f64()))
}

impl<T: Real> DeltaReport<T> {
    /// Markdown table with before, after and signed change per metric.
    pub fn to_markdown(&self, before: &QualityReport<T>, after: &QualityReport<T>) -> String {
        let mut out = String::from("| Metric | Before | After | Δ |\n|---|---|---|---|\n");
        let rows = [
            ("NPMI", before.aggregate.npmi, after.aggregate.npmi, self.npmi),
            ("UCI", before.aggregate.uci, after.aggregate.uci, self.uci),
            ("S", before.aggregate.s, after.aggregate.s, self.s),
            ("D", before.aggregate.d, after.aggregate.d, self.d),
        ];
        for (name, b, a, d) in rows {
            let _ = writeln!(out, "| {name} | {} | {} | {} |", plain(b), plain(a), signed(d));
        }
        out
    }
}
