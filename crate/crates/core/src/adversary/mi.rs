//! Plug-in entropy and mutual information over discrete samples.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

pub const MIN_MI_SAMPLES: usize = 1000;

/// Shannon entropy in bits of a probability vector; zero entries are skipped.
pub fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Miller-Madow corrected plug-in entropy of the values in `counts`.
fn miller_madow<K: Hash + Eq>(counts: &HashMap<K, usize>, n: usize) -> f64 {
    let n_f = n as f64;
    let plug_in = entropy_bits(counts.values().map(|&c| c as f64 / n_f));
    plug_in + (counts.len() as f64 - 1.0) / (2.0 * n_f * std::f64::consts::LN_2)
}

fn histogram<K: Hash + Eq + Clone>(items: impl Iterator<Item = K>) -> HashMap<K, usize> {
    let mut h = HashMap::new();
    for k in items {
        *h.entry(k).or_insert(0) += 1;
    }
    h
}

/// `I(S;T) = H(S) + H(T) - H(S,T)` without the sample-count precondition.
pub(crate) fn mutual_information_unchecked<S, T>(pairs: &[(S, T)]) -> f64
where
    S: Hash + Eq + Clone,
    T: Hash + Eq + Clone,
{
    let n = pairs.len();
    let hs = miller_madow(&histogram(pairs.iter().map(|(s, _)| s.clone())), n);
    let ht = miller_madow(&histogram(pairs.iter().map(|(_, t)| t.clone())), n);
    let hst = miller_madow(&histogram(pairs.iter().cloned()), n);
    hs + ht - hst
}

/// Mutual information in bits between secrets and quantized features.
pub fn estimate_mutual_information<S, T>(pairs: &[(S, T)]) -> Result<f64>
where
    S: Hash + Eq + Clone,
    T: Hash + Eq + Clone,
{
    if pairs.len() < MIN_MI_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{} samples given, at least {MIN_MI_SAMPLES} required",
            pairs.len()
        )));
    }
    Ok(mutual_information_unchecked(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RngStream;
    use rand::Rng;

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy_bits([1.0]), 0.0);
        assert!((entropy_bits([0.25; 4]) - 2.0).abs() < 1e-12);
        assert!((entropy_bits([0.5, 0.5, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_pairs_carry_almost_nothing() {
        let mut rng = RngStream::new(11, 0);
        let pairs: Vec<(u8, u8)> = (0..10_000)
            .map(|_| (rng.random_range(0..8), rng.random_range(0..8)))
            .collect();
        let mi = estimate_mutual_information(&pairs).unwrap();
        assert!(mi.abs() <= 0.02, "{mi}");
    }

    #[test]
    fn identity_over_eight_values_is_three_bits() {
        let mut rng = RngStream::new(12, 0);
        let pairs: Vec<(u8, u8)> = (0..10_000)
            .map(|_| {
                let s = rng.random_range(0..8);
                (s, s)
            })
            .collect();
        let mi = estimate_mutual_information(&pairs).unwrap();
        assert!((mi - 3.0).abs() <= 0.05, "{mi}");
    }

    #[test]
    fn too_few_samples() {
        let pairs = vec![(1u8, 1u8); 999];
        assert!(matches!(
            estimate_mutual_information(&pairs),
            Err(Error::InsufficientSamples(_))
        ));
    }
}
