//! Downstream evaluation: documents become topic distributions (normalized
//! cosine similarity to topic centroids) and a linear SVM predicts labels.

mod svm;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::embeddings::{cosine_similarity, mean_vector, EmbeddingStore};
use crate::error::{Error, Result};
use crate::fsutil::read_to_string;
use crate::scalar::Real;
use crate::topics::TopicSet;

pub use svm::{accuracy, macro_f1, LinearSvm, SvmParams};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TopicDistribution<T> {
    pub doc_id: String,
    pub weights: Vec<T>,
}

/// Cosine similarity to each topic, negatives clamped to 0, L1-normalized;
/// uniform when every similarity is non-positive.
pub fn topic_distribution<T: Real>(
    doc_id: &str,
    doc_embedding: &[T],
    topic_embeddings: &[Vec<T>],
) -> Result<TopicDistribution<T>> {
    if topic_embeddings.is_empty() {
        return Err(Error::Contract("no topic embeddings".into()));
    }
    let sims = topic_embeddings
        .iter()
        .map(|t| cosine_similarity(doc_embedding, t).map(|c| c.max(T::zero())))
        .collect::<Result<Vec<T>>>()?;
    let total: T = sims.iter().copied().sum();
    let weights = if total > T::zero() {
        sims.into_iter().map(|s| s / total).collect()
    } else {
        vec![T::one() / T::of_usize(topic_embeddings.len()); topic_embeddings.len()]
    };
    Ok(TopicDistribution {
        doc_id: doc_id.to_string(),
        weights,
    })
}

/// Mean of the document's token vectors.
pub fn embed_document<T: Real>(doc: &Document, store: &EmbeddingStore<T>) -> Result<Vec<T>> {
    mean_vector(&doc.tokens, store)
        .map(|(v, _)| v)
        .ok_or_else(|| Error::Unembeddable(format!("document {} has no embedded token", doc.id)))
}

/// Mean of the topic words' vectors (the same centroid used for D).
pub fn embed_topic<T: Real, S: AsRef<str>>(words: &[S], store: &EmbeddingStore<T>) -> Result<Vec<T>> {
    mean_vector(words, store)
        .map(|(v, _)| v)
        .ok_or_else(|| Error::Unembeddable("topic has no embedded word".into()))
}

/// Reads one whitespace-separated vector per line, aligned with the corpus.
pub fn load_doc_embeddings<T: Real>(path: &Path) -> Result<Vec<Vec<T>>> {
    let text = read_to_string(path)?;
    let source = path.display().to_string();
    let mut out: Vec<Vec<T>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let v = line
            .split_whitespace()
            .map(|x| {
                x.parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .map(T::of)
                    .ok_or_else(|| Error::format(&source, i + 1, format!("not a finite number: {x:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if v.is_empty() {
            return Err(Error::format(&source, i + 1, "empty vector"));
        }
        if let Some(first) = out.first() {
            if first.len() != v.len() {
                return Err(Error::format(
                    &source,
                    i + 1,
                    format!("expected {} values, found {}", first.len(), v.len()),
                ));
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Per class, shuffles member indices with a seeded RNG and puts
/// round(fraction * n), clamped to [1, n-1], into training. Both returned
/// index lists are sorted.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in by_class {
        if members.len() < 2 {
            return Err(Error::Classification(format!("label {class} has fewer than two documents")));
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let k = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub accuracy: f64,
    /// Macro-averaged over classes.
    pub f1: f64,
    pub f1_average: String,
    pub split_seed: u64,
    pub train_fraction: f64,
    pub num_train: usize,
    pub num_test: usize,
    pub labels: Vec<String>,
    /// Documents dropped because no token had a vector.
    pub excluded_documents: usize,
}

/// Splits, trains and scores on precomputed feature vectors.
pub fn classify_features<T: Real>(
    features: &[Vec<T>],
    labels: &[String],
    split_seed: u64,
    train_fraction: f64,
    params: &SvmParams,
) -> Result<ClassificationOutcome> {
    if features.len() != labels.len() {
        return Err(Error::Classification(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let names: Vec<String> = {
        let mut v: Vec<String> = labels.to_vec();
        v.sort();
        v.dedup();
        v
    };
    if names.len() < 2 {
        return Err(Error::Classification("need at least two distinct labels".into()));
    }
    let ids: Vec<usize> = labels
        .iter()
        .map(|l| names.binary_search(l).expect("label is in the sorted set"))
        .collect();
    let (train, test) = stratified_split(&ids, train_fraction, split_seed)?;
    let xs: Vec<Vec<T>> = train.iter().map(|&i| features[i].clone()).collect();
    let ys: Vec<usize> = train.iter().map(|&i| ids[i]).collect();
    let model = LinearSvm::train(&xs, &ys, names.len(), params)?;
    let truth: Vec<usize> = test.iter().map(|&i| ids[i]).collect();
    let predicted: Vec<usize> = test.iter().map(|&i| model.predict(&features[i])).collect();
    Ok(ClassificationOutcome {
        accuracy: accuracy(&truth, &predicted),
        f1: macro_f1(&truth, &predicted),
        f1_average: "macro".into(),
        split_seed,
        train_fraction,
        num_train: train.len(),
        num_test: test.len(),
        labels: names,
        excluded_documents: 0,
    })
}

/// Topic-distribution features for `(doc_id, embedding, label)` rows.
pub fn distributions<T: Real>(
    rows: &[(String, Vec<T>)],
    topics: &TopicSet,
    store: &EmbeddingStore<T>,
) -> Result<Vec<TopicDistribution<T>>> {
    let topic_vecs = topics
        .topics()
        .iter()
        .map(|t| embed_topic(t, store))
        .collect::<Result<Vec<_>>>()?;
    rows.par_iter()
        .map(|(id, v)| topic_distribution(id, v, &topic_vecs))
        .collect()
}

/// Labeled corpus → topic distributions → SVM. Document embeddings default to
/// mean word vectors; `doc_embeddings` (aligned with the corpus documents)
/// overrides them.
pub fn run_classification<T: Real>(
    corpus: &Corpus,
    topics: &TopicSet,
    store: &EmbeddingStore<T>,
    doc_embeddings: Option<&[Vec<T>]>,
    split_seed: u64,
    train_fraction: f64,
    params: &SvmParams,
) -> Result<ClassificationOutcome> {
    if let Some(d) = doc_embeddings {
        if d.len() != corpus.documents.len() {
            return Err(Error::Classification(format!(
                "{} document embeddings for {} documents",
                d.len(),
                corpus.documents.len()
            )));
        }
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut excluded = 0usize;
    for (i, doc) in corpus.documents.iter().enumerate() {
        let label = doc
            .label
            .clone()
            .ok_or_else(|| Error::Classification(format!("document {} has no label", doc.id)))?;
        let v = match doc_embeddings {
            Some(d) => Ok(d[i].clone()),
            None => embed_document(doc, store),
        };
        match v {
            Ok(v) => {
                rows.push((doc.id.clone(), v));
                labels.push(label);
            }
            Err(e) => {
                log::warn!("excluding document: {e}");
                excluded += 1;
            }
        }
    }
    let dists = distributions(&rows, topics, store)?;
    let features: Vec<Vec<T>> = dists.into_iter().map(|d| d.weights).collect();
    let mut outcome = classify_features(&features, &labels, split_seed, train_fraction, params)?;
    outcome.excluded_documents = excluded;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_and_normalize() {
        // unit topic vectors at known cosines to the document direction [1, 0]
        let topics = vec![
            vec![0.8, 0.6],
            vec![0.2, (1.0f64 - 0.04).sqrt()],
            vec![-0.5, (1.0f64 - 0.25).sqrt()],
        ];
        let d = topic_distribution("d", &[1.0, 0.0], &topics).unwrap();
        assert!((d.weights[0] - 0.8).abs() < 1e-12);
        assert!((d.weights[1] - 0.2).abs() < 1e-12);
        assert_eq!(d.weights[2], 0.0);
    }

    #[test]
    fn uniform_cases() {
        let d = topic_distribution("d", &[1.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(d.weights, vec![0.5, 0.5]);
        let d = topic_distribution("d", &[1.0, 0.0], &[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(d.weights, vec![0.5, 0.5]);
        assert!(topic_distribution("d", &[0.0, 0.0], &[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn embeddings_are_means() {
        let store = EmbeddingStore::from_pairs([("a", vec![1.0, 0.0]), ("b", vec![0.0, 2.0])]).unwrap();
        let doc = |t: &[&str]| Document {
            id: "x".into(),
            tokens: t.iter().map(|s| s.to_string()).collect(),
            label: None,
        };
        assert_eq!(embed_document(&doc(&["a"]), &store).unwrap(), vec![1.0, 0.0]);
        assert_eq!(embed_document(&doc(&["a", "b", "zz"]), &store).unwrap(), vec![0.5, 1.0]);
        assert!(embed_document(&doc(&["zz"]), &store).is_err());
        assert_eq!(embed_topic(&["b"], &store).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn split_is_stratified() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let (train, test) = stratified_split(&labels, 0.8, 7).unwrap();
        assert_eq!((train.len(), test.len()), (16, 4));
        assert_eq!(test.iter().filter(|&&i| labels[i] == 0).count(), 2);
        assert_eq!(stratified_split(&labels, 0.8, 7).unwrap(), (train, test));
        assert!(stratified_split(&[0, 0, 1], 0.8, 1).is_err());
    }

    #[test]
    fn single_label_is_error() {
        let f = vec![vec![1.0], vec![2.0]];
        let l = vec!["x".to_string(), "x".to_string()];
        assert!(classify_features(&f, &l, 1, 0.8, &SvmParams::default()).is_err());
    }
}
