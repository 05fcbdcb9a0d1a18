//! Embedding-based topic granularity: within-topic similarity S and
//! between-topic distance D.

use crate::embeddings::{cosine_similarity, topic_centroid, EmbeddingStore};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::topics::TopicSet;

/// Mean pairwise cosine among the embedded words of one topic. `None` when
/// fewer than two words have (nonzero) vectors.
pub fn topic_within_similarity<T: Real, S: AsRef<str>>(topic: &[S], store: &EmbeddingStore<T>) -> Option<T> {
    let vecs: Vec<&[T]> = topic.iter().filter_map(|w| store.get(w.as_ref())).collect();
    let mut sum = T::zero();
    let mut n = 0usize;
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            if let Ok(c) = cosine_similarity(vecs[i], vecs[j]) {
                sum += c;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / T::of_usize(n))
}

/// S: the mean of per-topic mean pairwise cosines. With full coverage this
/// is 2 / (K N (N-1)) times the sum over all within-topic pairs. Topics with
/// fewer than two embedded words are skipped with a warning.
pub fn within_topic_similarity<T: Real>(topics: &TopicSet, store: &EmbeddingStore<T>) -> Result<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for (i, t) in topics.topics().iter().enumerate() {
        match topic_within_similarity(t, store) {
            Some(s) => {
                sum += s;
                n += 1;
            }
            None => log::warn!("topic {i} has fewer than two embedded words; excluded from S"),
        }
    }
    if n == 0 {
        return Err(Error::Unembeddable("no topic has two embedded words".into()));
    }
    Ok(sum / T::of_usize(n))
}

/// D: mean squared Euclidean distance between all pairs of topic centroids.
pub fn between_topic_distance<T: Real>(topics: &TopicSet, store: &EmbeddingStore<T>) -> Result<T> {
    if topics.len() < 2 {
        return Err(Error::TooFewTopics);
    }
    let centroids = topics
        .topics()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            topic_centroid(i, t, store)
                .map(|c| c.vector)
                .ok_or_else(|| Error::Unembeddable(format!("topic {i} has no embedded word")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = T::zero();
    let mut n = 0usize;
    for i in 0..centroids.len() {
        for m in i + 1..centroids.len() {
            sum += centroids[i]
                .iter()
                .zip(&centroids[m])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>();
            n += 1;
        }
    }
    Ok(sum / T::of_usize(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(topics: &[&[&str]]) -> TopicSet {
        TopicSet::new(
            topics.iter().map(|t| t.iter().map(|w| w.to_string()).collect()).collect(),
            "t",
        )
        .unwrap()
    }

    fn store(pairs: &[(&str, &[f64])]) -> EmbeddingStore<f64> {
        EmbeddingStore::from_pairs(pairs.iter().map(|(w, v)| (*w, v.to_vec()))).unwrap()
    }

    #[test]
    fn s_identical_and_orthogonal() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[2.0, 0.0]), ("c", &[0.0, 1.0])]);
        assert_eq!(within_topic_similarity(&ts(&[&["a", "b"]]), &s).unwrap(), 1.0);
        assert_eq!(within_topic_similarity(&ts(&[&["a", "c"]]), &s).unwrap(), 0.0);
    }

    #[test]
    fn s_skips_unembedded_topics() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[1.0, 1.0])]);
        let v = within_topic_similarity(&ts(&[&["a", "b"], &["x", "y"]]), &s).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(within_topic_similarity(&ts(&[&["x", "y"]]), &s).is_err());
    }

    #[test]
    fn d_examples() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 0.0])]);
        assert_eq!(between_topic_distance(&ts(&[&["a"], &["b"]]), &s).unwrap(), 2.0);
        assert_eq!(between_topic_distance(&ts(&[&["a"], &["c"]]), &s).unwrap(), 0.0);
        assert!(matches!(between_topic_distance(&ts(&[&["a"]]), &s), Err(Error::TooFewTopics)));
        assert!(between_topic_distance(&ts(&[&["a"], &["zz"]]), &s).is_err());
    }
}
