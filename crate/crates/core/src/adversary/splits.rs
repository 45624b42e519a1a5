//! Exact decoy enumeration: every split of a public total.

use std::collections::BTreeMap;

use serde::Serialize;

use super::mi::entropy_bits;
use crate::sim::Interval;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSet {
    pub total: u64,
    /// `(sender value, receiver key)` pairs, sender value ascending.
    pub pairs: Vec<(u64, u64)>,
}

impl SplitSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// A single consistent split means the total gives the secret away.
    pub fn is_single_decoy(&self) -> bool {
        self.pairs.len() == 1
    }
}

/// All `(a, k)` with `a` in `domain`, `k >= 1` and `a + k == total`.
pub fn enumerate_splits(total: u64, domain: Interval) -> SplitSet {
    let hi = domain.n2.min(total.saturating_sub(1));
    let pairs = (domain.n1..=hi).map(|a| (a, total - a)).collect();
    SplitSet { total, pairs }
}

/// Splits whose key also lies in `keys`.
pub fn enumerate_splits_with_keys(total: u64, domain: Interval, keys: Interval) -> SplitSet {
    let mut s = enumerate_splits(total, domain);
    s.pairs.retain(|&(_, k)| keys.contains(k));
    s
}

/// Exact posterior over the sender value given the total, with secret
/// and key independent and uniform on their domains.
pub fn analytic_posterior(total: u64, domain: Interval, keys: Interval) -> BTreeMap<u64, f64> {
    let splits = enumerate_splits_with_keys(total, domain, keys);
    let p = 1.0 / splits.len() as f64;
    splits.pairs.iter().map(|&(a, _)| (a, p)).collect()
}

/// `I(S; S+K)` in bits for `S`, `K` independent and uniform, by enumeration.
pub fn sum_channel_information(secrets: Interval, keys: Interval) -> f64 {
    let n = (secrets.size() * keys.size()) as f64;
    let mut totals: BTreeMap<u64, u64> = BTreeMap::new();
    for s in secrets.iter() {
        for k in keys.iter() {
            *totals.entry(s + k).or_default() += 1;
        }
    }
    // H(S+K) - H(S+K | S), and H(S+K | S) = H(K).
    entropy_bits(totals.values().map(|&c| c as f64 / n)) - (keys.size() as f64).log2()
}
