use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Smoothing added to joint probabilities inside logarithms.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Boolean sliding-window document frequencies for a fixed set of target words.
///
/// A window of width `w` slides over each document with stride 1; documents
/// no longer than `w` form a single window, and `w = 0` means one window per
/// document. A word or pair counts at most once per window.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    pub window: usize,
    pub total_windows: u64,
    pub epsilon: f64,
    targets: Vec<String>,
    index: HashMap<String, u32>,
    word_windows: Vec<u64>,
    pair_windows: HashMap<(u32, u32), u64>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CooccurrenceStats {
    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    /// Windows containing `word`; `None` if it is not a target word.
    pub fn word_count(&self, word: &str) -> Option<u64> {
        self.index.get(word).map(|&i| self.word_windows[i as usize])
    }

    /// Windows containing both words; `None` if either is not a target.
    pub fn pair_count(&self, a: &str, b: &str) -> Option<u64> {
        let ia = *self.index.get(a)?;
        let ib = *self.index.get(b)?;
        if ia == ib {
            return Some(self.word_windows[ia as usize]);
        }
        Some(self.pair_windows.get(&ordered(ia, ib)).copied().unwrap_or(0))
    }

    /// Target words that occur in at least one window.
    pub fn is_seen(&self, word: &str) -> bool {
        self.word_count(word).is_some_and(|c| c > 0)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

#[derive(Default)]
struct Partial {
    total: u64,
    words: Vec<u64>,
    pairs: HashMap<(u32, u32), u64>,
}

impl Partial {
    fn new(n: usize) -> Self {
        Partial {
            total: 0,
            words: vec![0; n],
            pairs: HashMap::new(),
        }
    }

    fn add_window(&mut self, present: &mut Vec<u32>) {
        self.total += 1;
        present.sort_unstable();
        for (i, &a) in present.iter().enumerate() {
            self.words[a as usize] += 1;
            for &b in &present[i + 1..] {
                *self.pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.total += other.total;
        self.words.iter_mut().zip(other.words).for_each(|(a, b)| *a += b);
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_insert(0) += v;
        }
        self
    }
}

fn count_document(ids: &[Option<u32>], window: usize, acc: &mut Partial) {
    let mut present = Vec::new();
    if window == 0 || ids.len() <= window {
        let set: HashSet<u32> = ids.iter().flatten().copied().collect();
        present.extend(set);
        acc.add_window(&mut present);
        return;
    }
    let mut inside: HashMap<u32, usize> = HashMap::new();
    for id in ids[..window].iter().flatten() {
        *inside.entry(*id).or_insert(0) += 1;
    }
    for start in 0..=ids.len() - window {
        if start > 0 {
            if let Some(out) = ids[start - 1] {
                let c = inside.get_mut(&out).expect("outgoing token was counted");
                *c -= 1;
                if *c == 0 {
                    inside.remove(&out);
                }
            }
            if let Some(inc) = ids[start + window - 1] {
                *inside.entry(inc).or_insert(0) += 1;
            }
        }
        present.clear();
        present.extend(inside.keys().copied());
        acc.add_window(&mut present);
    }
}

/// Counts windows over tokenized documents. Work is sharded across threads;
/// integer merging makes the result independent of the sharding.
pub fn build_cooccurrence<D, S>(documents: &[D], window: usize, target_words: &[S]) -> Result<CooccurrenceStats>
where
    D: AsRef<[String]> + Sync,
    S: AsRef<str>,
{
    if documents.iter().all(|d| d.as_ref().is_empty()) {
        return Err(Error::DegenerateCorpus("reference corpus has no tokens".into()));
    }
    let mut targets: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    for w in target_words {
        let w = w.as_ref();
        if !index.contains_key(w) {
            index.insert(w.to_string(), targets.len() as u32);
            targets.push(w.to_string());
        }
    }
    if targets.is_empty() {
        return Err(Error::Config("no target words to count".into()));
    }

    let n = targets.len();
    let partial = documents
        .par_iter()
        .filter(|d| !d.as_ref().is_empty())
        .fold(
            || Partial::new(n),
            |mut acc, d| {
                let ids: Vec<Option<u32>> = d.as_ref().iter().map(|t| index.get(t).copied()).collect();
                count_document(&ids, window, &mut acc);
                acc
            },
        )
        .reduce(|| Partial::new(n), Partial::merge);

    Ok(CooccurrenceStats {
        window,
        total_windows: partial.total,
        epsilon: DEFAULT_EPSILON,
        targets,
        index,
        word_windows: partial.words,
        pair_windows: partial.pairs,
    })
}

pub fn build_cooccurrence_from_corpus<S: AsRef<str>>(
    corpus: &Corpus,
    window: usize,
    target_words: &[S],
) -> Result<CooccurrenceStats> {
    let docs: Vec<&[String]> = corpus.documents.iter().map(|d| d.tokens.as_slice()).collect();
    build_cooccurrence(&docs, window, target_words)
}
