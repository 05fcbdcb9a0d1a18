//! Static word vectors in the GloVe text format.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct EmbeddingStore<T> {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Real> EmbeddingStore<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Builds a store from (word, vector) pairs; the first vector fixes the dimension.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<T>)>,
        S: Into<String>,
    {
        let mut it = pairs.into_iter().peekable();
        let dim = it.peek().map(|(_, v)| v.len()).ok_or_else(|| Error::Config("no vectors given".into()))?;
        let mut store = EmbeddingStore::new(dim)?;
        for (w, v) in it {
            store.insert(w.into(), v)?;
        }
        Ok(store)
    }

    /// Adds or replaces a vector.
    pub fn insert(&mut self, word: String, vector: Vec<T>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        match self.index.get(&word) {
            Some(&i) => self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(&vector),
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.data.extend_from_slice(&vector);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index.get(word).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    /// Parses GloVe-style text. With `restrict_to`, only vocabulary words are kept.
    pub fn parse(text: &str, source: &str, restrict_to: Option<&Vocabulary>) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut store: Option<EmbeddingStore<T>> = None;
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<&str> = parts.collect();
            let d = *dim.get_or_insert(values.len());
            if values.is_empty() {
                return Err(Error::format(source, i + 1, "line has no vector components"));
            }
            if values.len() != d {
                return Err(Error::format(
                    source,
                    i + 1,
                    format!("expected {d} components, found {}", values.len()),
                ));
            }
            if restrict_to.is_some_and(|v| !v.contains(word)) {
                continue;
            }
            let mut vec = Vec::with_capacity(d);
            for v in values {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::format(source, i + 1, format!("bad number '{v}'")))?;
                vec.push(T::of(x));
            }
            store.get_or_insert(EmbeddingStore::new(d)?).insert(word.to_string(), vec)?;
        }
        match store {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(Error::format(source, 0, "no usable embedding lines")),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            for x in self.get(w).unwrap() {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_embeddings<T: Real>(path: &Path, restrict_to: Option<&Vocabulary>) -> Result<EmbeddingStore<T>> {
    let text = fsutil::read_to_string(path)?;
    EmbeddingStore::parse(&text, &path.display().to_string(), restrict_to)
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// dot(a, b) / (|a| |b|), clamped into [-1, 1].
pub fn cosine_similarity<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroVector);
    }
    let c = dot(a, b) / (na * nb);
    Ok(c.max(-T::one()).min(T::one()))
}

/// Mean of the embedded words' vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicCentroid<T> {
    pub topic_index: usize,
    pub vector: Vec<T>,
    pub covered: usize,
}

/// Arithmetic mean of the vectors of `words` found in the store; `None` if
/// no word has a vector.
pub fn mean_vector<T: Real, S: AsRef<str>>(words: &[S], store: &EmbeddingStore<T>) -> Option<(Vec<T>, usize)> {
    let mut acc = vec![T::zero(); store.dim()];
    let mut n = 0usize;
    for w in words {
        if let Some(v) = store.get(w.as_ref()) {
            acc.iter_mut().zip(v).for_each(|(a, &x)| *a += x);
            n += 1;
        }
    }
    if n == 0 {
        return None;
    }
    let nf = T::of_usize(n);
    acc.iter_mut().for_each(|a| *a /= nf);
    Some((acc, n))
}

pub fn topic_centroid<T: Real, S: AsRef<str>>(
    topic_index: usize,
    words: &[S],
    store: &EmbeddingStore<T>,
) -> Option<TopicCentroid<T>> {
    mean_vector(words, store).map(|(vector, covered)| TopicCentroid {
        topic_index,
        vector,
        covered,
    })
}

/// Mean cosine similarity of `v` to each of `targets`. Zero-norm targets are
/// skipped; `None` when nothing could be compared.
pub fn mean_cosine_to<T: Real>(v: &[T], targets: &[&[T]]) -> Option<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for t in targets {
        if let Ok(c) = cosine_similarity(v, t) {
            sum += c;
            n += 1;
        }
    }
    (n > 0).then(|| sum / T::of_usize(n))
}

/// Vocabulary word most similar on average to `candidates`.
///
/// Searches `(V ∩ store) \ exclude`; candidates without a vector are ignored.
/// Ties go to the lowest vocabulary index.
pub fn nearest_in_vocab_by_avg_similarity<T: Real, S: AsRef<str>>(
    candidates: &[S],
    vocabulary: &Vocabulary,
    exclude: &HashSet<String>,
    store: &EmbeddingStore<T>,
) -> Result<String> {
    let targets: Vec<&[T]> = candidates
        .iter()
        .filter_map(|c| store.get(c.as_ref()))
        .filter(|v| norm(v) > T::zero())
        .collect();
    if targets.is_empty() {
        return Err(Error::FallbackImpossible("no candidate word has an embedding".into()));
    }

    let scores: Vec<Option<T>> = vocabulary
        .words()
        .par_iter()
        .map(|w| {
            if exclude.contains(w) {
                return None;
            }
            store.get(w).and_then(|v| mean_cosine_to(v, &targets))
        })
        .collect();

    let mut best: Option<(usize, T)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if let Some(s) = s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| vocabulary.words()[i].clone())
        .ok_or_else(|| Error::EmptySearchSet("no embedded vocabulary word outside the excluded set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn store(pairs: &[(&str, &[f64])]) -> EmbeddingStore<f64> {
        EmbeddingStore::from_pairs(pairs.iter().map(|(w, v)| (*w, v.to_vec()))).unwrap()
    }

    #[test]
    fn parse_two_words() {
        let s: EmbeddingStore<f64> = EmbeddingStore::parse("a 1 0\nb 0 1\n", "e", None).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("b"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn parse_reports_dimension_line() {
        let r: Result<EmbeddingStore<f32>> = EmbeddingStore::parse("a 1 0\nb 0 1\nc 1 0 0\n", "e", None);
        assert!(matches!(r, Err(Error::Format { line: 3, .. })));
    }

    #[test]
    fn parse_restricted_and_empty() {
        let v = Vocabulary::from_words(["b"]).unwrap();
        let s: EmbeddingStore<f64> = EmbeddingStore::parse("a 1 0\nb 0 1\n", "e", Some(&v)).unwrap();
        assert_eq!(s.words(), &["b"]);
        let v = Vocabulary::from_words(["z"]).unwrap();
        assert!(EmbeddingStore::<f64>::parse("a 1 0\n", "e", Some(&v)).is_err());
        assert!(EmbeddingStore::<f64>::parse("", "e", None).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(
            cosine_similarity(&[1.0f64, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert!(matches!(cosine_similarity(&[0.0f32, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn fallback_two_word_vocab() {
        let s = store(&[("c", &[1.0, 0.0]), ("x", &[1.0, 0.0]), ("y", &[0.0, 1.0])]);
        let v = Vocabulary::from_words(["x", "y"]).unwrap();
        let none = HashSet::new();
        assert_eq!(nearest_in_vocab_by_avg_similarity(&["c"], &v, &none, &s).unwrap(), "x");
        let ex: HashSet<String> = ["x".to_string()].into();
        assert_eq!(nearest_in_vocab_by_avg_similarity(&["c"], &v, &ex, &s).unwrap(), "y");
    }

    #[test]
    fn fallback_three_word_vocab() {
        let n = |a: f64, b: f64| {
            let l = (a * a + b * b).sqrt();
            vec![a / l, b / l]
        };
        let s = EmbeddingStore::from_pairs(vec![
            ("x", n(1.0, 0.0)),
            ("y", n(0.0, 1.0)),
            ("z", n(0.9, 0.1)),
            ("c1", n(1.0, 0.0)),
            ("c2", n(0.8, 0.2)),
        ])
        .unwrap();
        let v = Vocabulary::from_words(["x", "y", "z"]).unwrap();
        // Exhaustive: mean cosine to {c1, c2} for each vocabulary word.
        let mut best = ("", f64::NEG_INFINITY);
        for w in ["x", "y", "z"] {
            let e = s.get(w).unwrap();
            let m = (cosine_similarity(e, s.get("c1").unwrap()).unwrap()
                + cosine_similarity(e, s.get("c2").unwrap()).unwrap())
                / 2.0;
            if m > best.1 {
                best = (w, m);
            }
        }
        // z sits between c1 and c2, so it wins.
        assert_eq!(best.0, "z");
        let got = nearest_in_vocab_by_avg_similarity(&["c1", "c2"], &v, &HashSet::new(), &s).unwrap();
        assert_eq!(got, best.0);
    }

    #[test]
    fn fallback_errors() {
        let s = store(&[("x", &[1.0, 0.0])]);
        let v = Vocabulary::from_words(["x"]).unwrap();
        assert!(matches!(
            nearest_in_vocab_by_avg_similarity(&["nope"], &v, &HashSet::new(), &s),
            Err(Error::FallbackImpossible(_))
        ));
        let ex: HashSet<String> = ["x".to_string()].into();
        assert!(matches!(
            nearest_in_vocab_by_avg_similarity(&["x"], &v, &ex, &s),
            Err(Error::EmptySearchSet(_))
        ));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = store(&[("c", &[1.0, 0.0]), ("p", &[2.0, 0.0]), ("q", &[1.0, 0.0])]);
        let v = Vocabulary::from_words(["q", "p"]).unwrap();
        assert_eq!(nearest_in_vocab_by_avg_similarity(&["c"], &v, &HashSet::new(), &s).unwrap(), "q");
    }

    #[test]
    fn centroid_skips_missing_words() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 3.0])]);
        let c = topic_centroid(4, &["a", "zz", "b"], &s).unwrap();
        assert_eq!(c.vector, vec![0.5, 1.5]);
        assert_eq!(c.covered, 2);
        assert!(topic_centroid(0, &["zz"], &s).is_none());
    }
}
