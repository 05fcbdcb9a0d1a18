//! Seeded synthetic data: clustered embeddings, topic sets with planted
//! intruders, and a two-theme labeled corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::embeddings::EmbeddingStore;
use crate::error::Result;
use crate::scalar::Real;
use crate::topics::TopicSet;

/// Words grouped into clusters whose vectors sit near a shared random center.
#[derive(Debug, Clone)]
pub struct ClusteredVocabulary<T> {
    /// `clusters[k]` lists the words of cluster k.
    pub clusters: Vec<Vec<String>>,
    pub vocabulary: Vocabulary,
    pub store: EmbeddingStore<T>,
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// One cluster per prefix, each of `words_per_cluster` words named `{prefix}{j}`.
/// Each word vector is its cluster center plus uniform noise of amplitude
/// `noise` per coordinate.
pub fn clustered_vocabulary<T: Real>(
    prefixes: &[&str],
    words_per_cluster: usize,
    dim: usize,
    noise: f64,
    seed: u64,
) -> Result<ClusteredVocabulary<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = EmbeddingStore::new(dim)?;
    let mut clusters = Vec::with_capacity(prefixes.len());
    for prefix in prefixes {
        let center = unit_vector(&mut rng, dim);
        let mut words = Vec::with_capacity(words_per_cluster);
        for j in 0..words_per_cluster {
            let w = format!("{prefix}{j}");
            let v: Vec<T> = center.iter().map(|&c| T::of(c + rng.gen_range(-noise..=noise))).collect();
            store.insert(w.clone(), v)?;
            words.push(w);
        }
        clusters.push(words);
    }
    let vocabulary = Vocabulary::from_words(clusters.iter().flatten().cloned())?;
    Ok(ClusteredVocabulary {
        clusters,
        vocabulary,
        store,
    })
}

/// Topics drawn from single clusters with `intruders` words from other
/// clusters placed at random positions.
pub fn topics_with_intruders<T>(
    vocab: &ClusteredVocabulary<T>,
    num_topics: usize,
    words_per_topic: usize,
    intruders: usize,
    seed: u64,
) -> Result<TopicSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = vocab.clusters.len();
    let mut topics = Vec::with_capacity(num_topics);
    for _ in 0..num_topics {
        let home = rng.gen_range(0..k);
        let mut words: Vec<String> = vocab.clusters[home]
            .choose_multiple(&mut rng, words_per_topic - intruders)
            .cloned()
            .collect();
        let foreign: Vec<&String> = vocab
            .clusters
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != home)
            .flat_map(|(_, ws)| ws)
            .collect();
        for w in foreign.choose_multiple(&mut rng, intruders) {
            let pos = rng.gen_range(0..=words.len());
            words.insert(pos, (*w).clone());
        }
        topics.push(words);
    }
    TopicSet::new(topics, format!("synthetic seed={seed}"))
}

/// Random topics of distinct vocabulary words with no planted structure.
pub fn random_topics(vocabulary: &Vocabulary, num_topics: usize, words_per_topic: usize, seed: u64) -> Result<TopicSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = (0..num_topics)
        .map(|_| {
            vocabulary
                .words()
                .choose_multiple(&mut rng, words_per_topic)
                .cloned()
                .collect()
        })
        .collect();
    TopicSet::new(topics, format!("random seed={seed}"))
}

/// Shape of a [`two_theme_corpus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThemeCorpusSpec {
    pub num_docs: usize,
    /// Theme tokens per document.
    pub doc_len: usize,
    pub words_per_theme: usize,
    /// Size of the theme-neutral word pool (`noise{j}`).
    pub noise_words: usize,
    /// Extra noise tokens appended to each document.
    pub noise_per_doc: usize,
    pub seed: u64,
}

impl Default for ThemeCorpusSpec {
    fn default() -> Self {
        ThemeCorpusSpec {
            num_docs: 200,
            doc_len: 12,
            words_per_theme: 16,
            noise_words: 2,
            noise_per_doc: 3,
            seed: 7,
        }
    }
}

/// Two-theme labeled corpus: document `i` draws `doc_len` tokens uniformly
/// from theme `i % 2` (words `alpha{j}` or `beta{j}`), then `noise_per_doc`
/// tokens from the shared noise pool, and is labeled with its theme.
pub fn two_theme_corpus(spec: &ThemeCorpusSpec) -> Vec<(String, Option<String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let themes = ["alpha", "beta"];
    (0..spec.num_docs)
        .map(|i| {
            let theme = themes[i % 2];
            let mut tokens: Vec<String> = (0..spec.doc_len)
                .map(|_| format!("{theme}{}", rng.gen_range(0..spec.words_per_theme)))
                .collect();
            if spec.noise_words > 0 {
                tokens.extend((0..spec.noise_per_doc).map(|_| format!("noise{}", rng.gen_range(0..spec.noise_words))));
            }
            (tokens.join(" "), Some(theme.to_string()))
        })
        .collect()
}

/// Embeddings matching [`two_theme_corpus`]: one cluster per theme, plus one
/// for the noise pool when it is non-empty. Clusters hold
/// `max(words_per_theme, noise_words)` words so every corpus word has a vector.
pub fn two_theme_embeddings<T: Real>(spec: &ThemeCorpusSpec, dim: usize) -> Result<ClusteredVocabulary<T>> {
    let prefixes: &[&str] = if spec.noise_words > 0 {
        &["alpha", "beta", "noise"]
    } else {
        &["alpha", "beta"]
    };
    clustered_vocabulary(prefixes, spec.words_per_theme.max(spec.noise_words), dim, 0.1, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::cosine_similarity;

    #[test]
    fn clusters_are_tight() {
        let v = clustered_vocabulary::<f64>(&["a", "b"], 5, 16, 0.1, 3).unwrap();
        let s = &v.store;
        let within = cosine_similarity(s.get("a0").unwrap(), s.get("a1").unwrap()).unwrap();
        assert!(within > 0.8, "{within}");
        assert_eq!(v.vocabulary.len(), 10);
    }

    #[test]
    fn intruders_are_planted() {
        let v = clustered_vocabulary::<f64>(&["a", "b", "c"], 12, 8, 0.1, 1).unwrap();
        let t = topics_with_intruders(&v, 4, 10, 2, 9).unwrap();
        for topic in t.topics() {
            let first = &topic.iter().max_by_key(|w| topic.iter().filter(|o| o.as_bytes()[0] == w.as_bytes()[0]).count()).unwrap()[..1];
            assert_eq!(topic.iter().filter(|w| !w.starts_with(first)).count(), 2);
        }
        assert_eq!(t.to_text(), topics_with_intruders(&v, 4, 10, 2, 9).unwrap().to_text());
    }

    #[test]
    fn corpus_is_labeled_and_seeded() {
        let spec = ThemeCorpusSpec {
            num_docs: 6,
            doc_len: 5,
            words_per_theme: 4,
            noise_words: 2,
            noise_per_doc: 1,
            seed: 2,
        };
        let c = two_theme_corpus(&spec);
        assert_eq!(c.len(), 6);
        assert_eq!(c[1].1.as_deref(), Some("beta"));
        let tokens: Vec<&str> = c[0].0.split(' ').collect();
        assert_eq!(tokens.len(), 6);
        assert!(tokens[..5].iter().all(|t| t.starts_with("alpha")));
        assert!(tokens[5].starts_with("noise"));
        assert_eq!(c, two_theme_corpus(&spec));
        let e = two_theme_embeddings::<f64>(&spec, 8).unwrap();
        assert!(c.iter().flat_map(|(t, _)| t.split(' ')).all(|w| e.store.contains(w)));
    }
}
