use super::cooccurrence::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn probabilities(a: &str, b: &str, stats: &CooccurrenceStats) -> Result<(f64, f64, f64, u64)> {
    let total = stats.total_windows as f64;
    let ca = stats.word_count(a).filter(|&c| c > 0).ok_or_else(|| Error::Unseen(a.to_string()))?;
    let cb = stats.word_count(b).filter(|&c| c > 0).ok_or_else(|| Error::Unseen(b.to_string()))?;
    let cab = stats.pair_count(a, b).unwrap_or(0);
    Ok((ca as f64 / total, cb as f64 / total, cab as f64 / total, cab))
}

/// log((P(a,b) + eps) / (P(a) P(b))).
pub fn pmi_pair<T: Real>(a: &str, b: &str, stats: &CooccurrenceStats) -> Result<T> {
    let (pa, pb, pab, _) = probabilities(a, b, stats)?;
    Ok(T::of(((pab + stats.epsilon) / (pa * pb)).ln()))
}

/// PMI normalized by -log(P(a,b) + eps), in [-1, 1]. Pairs that never
/// co-occur score -1; pairs present in every window score 1.
pub fn npmi_pair<T: Real>(a: &str, b: &str, stats: &CooccurrenceStats) -> Result<T> {
    let (pa, pb, pab, cab) = probabilities(a, b, stats)?;
    if cab == 0 {
        return Ok(-T::one());
    }
    if cab == stats.total_windows {
        return Ok(T::one());
    }
    let joint = pab + stats.epsilon;
    let v = (joint / (pa * pb)).ln() / -joint.ln();
    Ok(T::of(v.clamp(-1.0, 1.0)))
}

/// Topic words that occur in the reference windows, in topic order.
pub fn scoreable_words<'a, S: AsRef<str>>(topic: &'a [S], stats: &CooccurrenceStats) -> Vec<&'a str> {
    topic.iter().map(AsRef::as_ref).filter(|w| stats.is_seen(w)).collect()
}

fn mean_over_pairs<T: Real, S: AsRef<str>>(
    topic: &[S],
    stats: &CooccurrenceStats,
    score: fn(&str, &str, &CooccurrenceStats) -> Result<T>,
) -> Result<T> {
    let words = scoreable_words(topic, stats);
    if words.len() < 2 {
        return Err(Error::Unscoreable(format!(
            "{} of {} words seen in the reference corpus",
            words.len(),
            topic.len()
        )));
    }
    let mut sum = T::zero();
    let mut n = 0usize;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            sum += score(words[i], words[j], stats)?;
            n += 1;
        }
    }
    Ok(sum / T::of_usize(n))
}

/// Mean NPMI over all unordered pairs of scoreable topic words.
pub fn topic_npmi<T: Real, S: AsRef<str>>(topic: &[S], stats: &CooccurrenceStats) -> Result<T> {
    mean_over_pairs(topic, stats, npmi_pair::<T>)
}

/// Mean PMI (UCI) over all unordered pairs of scoreable topic words.
pub fn topic_uci<T: Real, S: AsRef<str>>(topic: &[S], stats: &CooccurrenceStats) -> Result<T> {
    mean_over_pairs(topic, stats, pmi_pair::<T>)
}

/// Row `i` holds, for each word of topic `i`, its mean NPMI against the
/// other scoreable words of that topic. `None` marks unscoreable cells.
pub fn per_word_npmi_matrix<T: Real, S: AsRef<str>>(
    topics: &[Vec<S>],
    stats: &CooccurrenceStats,
) -> Result<Vec<Vec<Option<T>>>> {
    topics
        .iter()
        .map(|topic| {
            let seen: Vec<bool> = topic.iter().map(|w| stats.is_seen(w.as_ref())).collect();
            let others = seen.iter().filter(|&&s| s).count();
            topic
                .iter()
                .enumerate()
                .map(|(j, wj)| {
                    if !seen[j] || others < 2 {
                        return Ok(None);
                    }
                    let mut sum = T::zero();
                    for (k, wk) in topic.iter().enumerate() {
                        if k != j && seen[k] {
                            sum += npmi_pair::<T>(wj.as_ref(), wk.as_ref(), stats)?;
                        }
                    }
                    Ok(Some(sum / T::of_usize(others - 1)))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::build_cooccurrence;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| t.split_whitespace().map(str::to_string).collect()).collect()
    }

    #[test]
    fn perfect_association() {
        let s = build_cooccurrence(&docs(&["a b", "c", "c", "a b x"]), 0, &["a", "b", "c"]).unwrap();
        assert_eq!(npmi_pair::<f64>("a", "b", &s).unwrap(), 1.0);
        assert_eq!(topic_npmi::<f64, _>(&["a", "b"], &s).unwrap(), 1.0);
    }

    #[test]
    fn never_together_is_minus_one() {
        let s = build_cooccurrence(&docs(&["a x", "b x"]), 0, &["a", "b"]).unwrap();
        assert_eq!(npmi_pair::<f64>("a", "b", &s).unwrap(), -1.0);
    }

    #[test]
    fn independence_is_zero() {
        // P(a) = P(b) = 1/2, P(a, b) = 1/4.
        let s = build_cooccurrence(&docs(&["a b", "a", "b", "z"]), 0, &["a", "b"]).unwrap();
        assert!(npmi_pair::<f64>("a", "b", &s).unwrap().abs() < 1e-6);
        assert!(pmi_pair::<f64>("a", "b", &s).unwrap().abs() < 1e-6);
    }

    #[test]
    fn five_document_fraction() {
        // counts: a 3, b 2, ab 1 over 5 windows.
        let s = build_cooccurrence(&docs(&["a b", "a", "a c", "b c", "c"]), 0, &["a", "b", "c"]).unwrap();
        let joint: f64 = 1.0 / 5.0 + 1e-12;
        let expected = (joint / ((3.0 / 5.0) * (2.0 / 5.0))).ln() / -joint.ln();
        assert!((npmi_pair::<f64>("a", "b", &s).unwrap() - expected).abs() < 1e-12);
        assert_eq!(npmi_pair::<f64>("a", "b", &s).unwrap(), npmi_pair::<f64>("b", "a", &s).unwrap());
    }

    #[test]
    fn unseen_and_unscoreable() {
        let s = build_cooccurrence(&docs(&["a b"]), 0, &["a", "b", "q"]).unwrap();
        assert!(matches!(npmi_pair::<f64>("a", "q", &s), Err(Error::Unseen(_))));
        assert!(matches!(npmi_pair::<f64>("a", "zz", &s), Err(Error::Unseen(_))));
        assert!(matches!(topic_npmi::<f64, _>(&["a", "q"], &s), Err(Error::Unscoreable(_))));
        // q is dropped, leaving one scored pair
        assert_eq!(topic_npmi::<f64, _>(&["a", "q", "b"], &s).unwrap(), 1.0);
    }

    #[test]
    fn matrix_two_words_and_sentinels() {
        let s = build_cooccurrence(&docs(&["a b", "a c", "b"]), 0, &["a", "b", "c", "q"]).unwrap();
        let m = per_word_npmi_matrix::<f64, _>(&[vec!["a", "b"], vec!["a", "q"]], &s).unwrap();
        let ab = npmi_pair::<f64>("a", "b", &s).unwrap();
        assert_eq!(m[0], vec![Some(ab), Some(ab)]);
        assert_eq!(m[1], vec![None, None]);
    }
}
