//! One-vs-rest linear SVM trained with the Pegasos subgradient method.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::dot;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub epochs: usize,
    /// Inverse regularization strength; λ = 1 / (C n).
    pub c: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            epochs: 200,
            c: 1.0,
            seed: 42,
        }
    }
}

/// One weight vector per class; the last component is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm<T> {
    pub weights: Vec<Vec<T>>,
}

fn augmented<T: Real>(x: &[T]) -> Vec<T> {
    let mut v = x.to_vec();
    v.push(T::one());
    v
}

impl<T: Real> LinearSvm<T> {
    /// Trains one binary hinge-loss classifier per class in `0..num_classes`
    /// with step size 1/(λt). Sample order is shuffled each epoch by a RNG
    /// seeded from `params.seed` and the class index.
    pub fn train(features: &[Vec<T>], labels: &[usize], num_classes: usize, params: &SvmParams) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::Classification("training set is empty or misaligned".into()));
        }
        if params.epochs == 0 || params.c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Config("svm needs epochs > 0 and C > 0".into()));
        }
        let dim = features[0].len();
        if let Some(bad) = features.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let xs: Vec<Vec<T>> = features.iter().map(|f| augmented(f)).collect();
        let n = xs.len();
        let lambda = 1.0 / (params.c * n as f64);
        let mut weights = Vec::with_capacity(num_classes);
        for class in 0..num_classes {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (class as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut order: Vec<usize> = (0..n).collect();
            let mut w = vec![T::zero(); dim + 1];
            let mut t = 0u64;
            for _ in 0..params.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let y = if labels[i] == class { T::one() } else { -T::one() };
                    let margin = y * dot(&w, &xs[i]);
                    let shrink = T::of(1.0 - eta * lambda);
                    w.iter_mut().for_each(|wj| *wj *= shrink);
                    if margin < T::one() {
                        let step = T::of(eta) * y;
                        w.iter_mut().zip(&xs[i]).for_each(|(wj, &xj)| *wj += step * xj);
                    }
                }
            }
            weights.push(w);
        }
        Ok(LinearSvm { weights })
    }

    /// Class with the highest decision value; ties go to the lower index.
    pub fn predict(&self, x: &[T]) -> usize {
        let x = augmented(x);
        let mut best = 0;
        let mut best_score = T::neg_infinity();
        for (k, w) in self.weights.iter().enumerate() {
            let s = dot(w, &x);
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        best
    }
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Unweighted mean of per-class F1 over classes occurring in either list.
/// A class with no true positives scores 0.
pub fn macro_f1(truth: &[usize], predicted: &[usize]) -> f64 {
    let mut classes: Vec<usize> = truth.iter().chain(predicted).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for &c in &classes {
        let tp = truth.iter().zip(predicted).filter(|&(&t, &p)| t == c && p == c).count() as f64;
        let fp = truth.iter().zip(predicted).filter(|&(&t, &p)| t != c && p == c).count() as f64;
        let fn_ = truth.iter().zip(predicted).filter(|&(&t, &p)| t == c && p != c).count() as f64;
        if tp > 0.0 {
            sum += 2.0 * tp / (2.0 * tp + fp + fn_);
        }
    }
    sum / classes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_two_class() {
        let xs = vec![vec![1.0, 0.0], vec![0.9, 0.1], vec![0.0, 1.0], vec![0.1, 0.9]];
        let ys = vec![0, 0, 1, 1];
        let m = LinearSvm::train(&xs, &ys, 2, &SvmParams::default()).unwrap();
        let pred: Vec<usize> = xs.iter().map(|x| m.predict(x)).collect();
        assert_eq!(pred, ys);
    }

    #[test]
    fn deterministic() {
        let xs = vec![vec![0.3, 0.7], vec![0.6, 0.4], vec![0.5, 0.5]];
        let ys = vec![0, 1, 0];
        let a = LinearSvm::train(&xs, &ys, 2, &SvmParams::default()).unwrap();
        let b = LinearSvm::train(&xs, &ys, 2, &SvmParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn f1_hand_values() {
        // class 0: tp 1, fp 1, fn 1 -> 0.5; class 1: tp 1, fp 1, fn 1 -> 0.5; class 2: tp 0 -> 0
        let truth = [0, 0, 1, 1, 2];
        let pred = [0, 1, 1, 0, 2];
        assert!((macro_f1(&truth, &pred) - (0.5 + 0.5 + 1.0) / 3.0).abs() < 1e-12);
        assert_eq!(accuracy(&truth, &pred), 0.6);
        assert_eq!(macro_f1(&[0, 1], &[1, 0]), 0.0);
    }

    #[test]
    fn bad_inputs() {
        assert!(LinearSvm::<f64>::train(&[], &[], 2, &SvmParams::default()).is_err());
        let p = SvmParams {
            epochs: 0,
            ..SvmParams::default()
        };
        assert!(LinearSvm::train(&[vec![1.0]], &[0], 2, &p).is_err());
    }
}
