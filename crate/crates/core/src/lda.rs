//! Collapsed Gibbs sampling for LDA.
//!
//! The sampler is strictly sequential over tokens and driven by a single
//! ChaCha stream, so a (corpus, parameters, seed) triple always produces the
//! same state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::topics::TopicSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams<T> {
    pub num_topics: usize,
    pub alpha: T,
    pub beta: T,
    pub iterations: usize,
    pub seed: u64,
}

impl<T: Real> LdaParams<T> {
    /// alpha = 50/K, beta = 0.01.
    pub fn with_defaults(num_topics: usize, iterations: usize, seed: u64) -> Self {
        LdaParams {
            num_topics,
            alpha: T::of(50.0) / T::of_usize(num_topics.max(1)),
            beta: T::of(0.01),
            iterations,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LdaState<T> {
    pub params: LdaParams<T>,
    vocabulary: Vocabulary,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    n_dk: Vec<usize>,
    n_kw: Vec<usize>,
    n_k: Vec<usize>,
    /// (sweep, log p(w | z)) recorded every 10 sweeps and after the last one.
    pub log_likelihood: Vec<(usize, f64)>,
}

impl<T: Real> LdaState<T> {
    pub fn num_topics(&self) -> usize {
        self.params.num_topics
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn doc_topic_count(&self, d: usize, k: usize) -> usize {
        self.n_dk[d * self.num_topics() + k]
    }

    pub fn topic_word_count(&self, k: usize, w: usize) -> usize {
        self.n_kw[k * self.vocabulary.len() + w]
    }

    pub fn topic_count(&self, k: usize) -> usize {
        self.n_k[k]
    }

    /// Smoothed p(w | k) = (n_kw + beta) / (n_k + beta |V|).
    pub fn word_probability(&self, k: usize, w: usize) -> T {
        let v = T::of_usize(self.vocabulary.len());
        (T::of_usize(self.topic_word_count(k, w)) + self.params.beta)
            / (T::of_usize(self.n_k[k]) + self.params.beta * v)
    }

    /// Verifies the count invariants against the assignment table.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.num_topics();
        let v = self.vocabulary.len();
        let mut n_dk = vec![0usize; self.docs.len() * k];
        let mut n_kw = vec![0usize; k * v];
        let mut n_k = vec![0usize; k];
        for (d, (doc, z)) in self.docs.iter().zip(&self.assignments).enumerate() {
            if doc.len() != z.len() {
                return Err(Error::Contract(format!("document {d} assignment length mismatch")));
            }
            for (&w, &t) in doc.iter().zip(z) {
                n_dk[d * k + t] += 1;
                n_kw[t * v + w] += 1;
                n_k[t] += 1;
            }
        }
        for d in 0..self.docs.len() {
            let s: usize = (0..k).map(|t| self.n_dk[d * k + t]).sum();
            if s != self.docs[d].len() {
                return Err(Error::Contract(format!("doc-topic counts of document {d} do not sum to its length")));
            }
        }
        for t in 0..k {
            let s: usize = (0..v).map(|w| self.n_kw[t * v + w]).sum();
            if s != self.n_k[t] {
                return Err(Error::Contract(format!("topic-word counts of topic {t} do not sum to n_k")));
            }
        }
        if n_dk != self.n_dk || n_kw != self.n_kw || n_k != self.n_k {
            return Err(Error::Contract("count tables disagree with assignments".into()));
        }
        Ok(())
    }

    /// Normalized full conditional for token `pos` of document `doc`, with
    /// that token's own assignment removed from the counts.
    pub fn conditional(&self, doc: usize, pos: usize) -> Vec<T> {
        let mut p = self.unnormalized_conditional(doc, pos, self.assignments[doc][pos]);
        let total: T = p.iter().copied().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p
    }

    fn unnormalized_conditional(&self, doc: usize, pos: usize, current: usize) -> Vec<T> {
        let k = self.num_topics();
        let v = self.vocabulary.len();
        let w = self.docs[doc][pos];
        let vbeta = self.params.beta * T::of_usize(v);
        (0..k)
            .map(|t| {
                let own = usize::from(t == current);
                let ndk = T::of_usize(self.n_dk[doc * k + t] - own);
                let nkw = T::of_usize(self.n_kw[t * v + w] - own);
                let nk = T::of_usize(self.n_k[t] - own);
                (ndk + self.params.alpha) * (nkw + self.params.beta) / (nk + vbeta)
            })
            .collect()
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng, scratch: &mut Vec<T>) {
        let k = self.num_topics();
        let v = self.vocabulary.len();
        let vbeta = self.params.beta * T::of_usize(v);
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.n_dk[d * k + old] -= 1;
                self.n_kw[old * v + w] -= 1;
                self.n_k[old] -= 1;

                scratch.clear();
                let mut total = T::zero();
                for t in 0..k {
                    let p = (T::of_usize(self.n_dk[d * k + t]) + self.params.alpha)
                        * (T::of_usize(self.n_kw[t * v + w]) + self.params.beta)
                        / (T::of_usize(self.n_k[t]) + vbeta);
                    total += p;
                    scratch.push(total);
                }
                let u = T::of(rng.gen::<f64>()) * total;
                let new = scratch.iter().position(|&c| c > u).unwrap_or(k - 1);

                self.assignments[d][i] = new;
                self.n_dk[d * k + new] += 1;
                self.n_kw[new * v + w] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    /// log p(w | z) under the collapsed model.
    pub fn compute_log_likelihood(&self) -> f64 {
        let k = self.num_topics();
        let v = self.vocabulary.len();
        let beta = self.params.beta.as_f64();
        let vbeta = beta * v as f64;
        let mut ll = k as f64 * ln_gamma(vbeta);
        for t in 0..k {
            for w in 0..v {
                let c = self.n_kw[t * v + w];
                if c > 0 {
                    ll += ln_gamma(c as f64 + beta) - ln_gamma(beta);
                }
            }
            ll -= ln_gamma(self.n_k[t] as f64 + vbeta);
        }
        ll
    }

    /// The `n` most probable words of each topic, ties broken by vocabulary index.
    pub fn top_words(&self, n: usize) -> Result<TopicSet> {
        let v = self.vocabulary.len();
        if n == 0 || n > v {
            return Err(Error::Config(format!("top-N must be in 1..={v}, got {n}")));
        }
        let topics = (0..self.num_topics())
            .map(|t| {
                let mut idx: Vec<usize> = (0..v).collect();
                // p(w|k) is monotone in n_kw within a topic, so integer counts
                // give the exact order.
                idx.sort_by(|&a, &b| {
                    self.topic_word_count(t, b)
                        .cmp(&self.topic_word_count(t, a))
                        .then(a.cmp(&b))
                });
                idx.truncate(n);
                idx.into_iter().map(|w| self.vocabulary.words()[w].clone()).collect()
            })
            .collect();
        TopicSet::new(
            topics,
            format!("lda k={} seed={} sweeps={}", self.num_topics(), self.params.seed, self.params.iterations),
        )
    }
}

pub fn fit_gibbs_lda<T: Real>(corpus: &Corpus, params: LdaParams<T>) -> Result<LdaState<T>> {
    let vocab = &corpus.vocabulary;
    if params.num_topics == 0 {
        return Err(Error::Config("number of topics must be at least 1".into()));
    }
    if params.num_topics > vocab.len() {
        return Err(Error::Config(format!(
            "number of topics ({}) exceeds vocabulary size ({})",
            params.num_topics,
            vocab.len()
        )));
    }
    if params.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    if !(params.alpha > T::zero() && params.beta > T::zero()) {
        return Err(Error::Config("alpha and beta must be positive".into()));
    }
    let docs: Vec<Vec<usize>> = corpus
        .documents
        .iter()
        .map(|d| {
            d.tokens
                .iter()
                .map(|t| {
                    vocab
                        .index_of(t)
                        .ok_or_else(|| Error::Contract(format!("token '{t}' missing from vocabulary")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if docs.iter().all(Vec::is_empty) {
        return Err(Error::DegenerateCorpus("no tokens to sample".into()));
    }

    let k = params.num_topics;
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = LdaState {
        params,
        vocabulary: vocab.clone(),
        assignments: Vec::with_capacity(docs.len()),
        n_dk: vec![0; docs.len() * k],
        n_kw: vec![0; k * v],
        n_k: vec![0; k],
        docs: Vec::new(),
        log_likelihood: Vec::new(),
    };
    for (d, doc) in docs.iter().enumerate() {
        let z: Vec<usize> = doc.iter().map(|_| rng.gen_range(0..k)).collect();
        for (&w, &t) in doc.iter().zip(&z) {
            state.n_dk[d * k + t] += 1;
            state.n_kw[t * v + w] += 1;
            state.n_k[t] += 1;
        }
        state.assignments.push(z);
    }
    state.docs = docs;

    let mut scratch = Vec::with_capacity(k);
    for sweep in 1..=params.iterations {
        state.sweep(&mut rng, &mut scratch);
        #[cfg(debug_assertions)]
        state.check_invariants()?;
        if sweep % 10 == 0 || sweep == params.iterations {
            state.log_likelihood.push((sweep, state.compute_log_likelihood()));
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusStats, Document};

    fn corpus(texts: &[&str]) -> Corpus {
        let tokens: Vec<Vec<String>> =
            texts.iter().map(|t| t.split_whitespace().map(str::to_string).collect()).collect();
        let mut words: Vec<String> = Vec::new();
        for t in tokens.iter().flatten() {
            if !words.contains(t) {
                words.push(t.clone());
            }
        }
        Corpus {
            documents: tokens
                .into_iter()
                .enumerate()
                .map(|(i, tokens)| Document {
                    id: i.to_string(),
                    tokens,
                    label: None,
                })
                .collect(),
            vocabulary: Vocabulary::from_words(words).unwrap(),
            stats: CorpusStats {
                doc_count: texts.len(),
                label_count: 0,
                avg_length: 0.0,
            },
        }
    }

    #[test]
    fn single_token_corpus() {
        let c = corpus(&["apple"]);
        let s = fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(1, 5, 1)).unwrap();
        assert_eq!(s.topic_word_count(0, 0), 1);
        assert_eq!(s.topic_count(0), 1);
    }

    #[test]
    fn top_words_by_count() {
        let c = corpus(&["a a b"]);
        let s = fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(1, 3, 7)).unwrap();
        assert_eq!(s.top_words(2).unwrap().topic(0), &["a", "b"]);
        assert!(s.top_words(3).is_err());
    }

    #[test]
    fn full_vocab_is_permutation() {
        let c = corpus(&["a b c d", "c d e f", "a f b e"]);
        let s = fit_gibbs_lda(&c, LdaParams::<f32>::with_defaults(2, 10, 3)).unwrap();
        let ts = s.top_words(c.vocabulary.len()).unwrap();
        for t in ts.topics() {
            let mut sorted = t.clone();
            sorted.sort();
            assert_eq!(sorted, vec!["a", "b", "c", "d", "e", "f"]);
        }
    }

    #[test]
    fn config_errors() {
        let c = corpus(&["a b"]);
        assert!(matches!(
            fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(3, 1, 0)),
            Err(Error::Config(_))
        ));
        assert!(fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(1, 0, 0)).is_err());
        assert!(fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(0, 1, 0)).is_err());
    }

    #[test]
    fn conditional_is_a_distribution() {
        let c = corpus(&["a b c d", "c d e f", "a f b e", "a a c"]);
        let s = fit_gibbs_lda(&c, LdaParams::<f64>::with_defaults(3, 20, 11)).unwrap();
        s.check_invariants().unwrap();
        for d in 0..4 {
            for i in 0..c.documents[d].tokens.len() {
                let p = s.conditional(d, i);
                assert!(p.iter().all(|&x| x >= 0.0));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn same_seed_same_state() {
        let c = corpus(&["a b c d", "c d e f", "a f b e", "a a c"]);
        let p = LdaParams::<f64>::with_defaults(2, 30, 99);
        let a = fit_gibbs_lda(&c, p).unwrap();
        let b = fit_gibbs_lda(&c, p).unwrap();
        assert_eq!(a.assignments(), b.assignments());
        assert_eq!(a.log_likelihood, b.log_likelihood);
        assert_eq!(a.log_likelihood.len(), 3);
    }
}
