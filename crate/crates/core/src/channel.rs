//! Additive superposition channel.
//!
//! The public observable at each tick is the sum of every private
//! contribution plus optional zero-mean Gaussian measurement noise. The
//! individual contributions never leave this module; the only value that
//! can be written to a transcript is a [`PublicMeasurement`] produced by
//! [`ChannelState::measure`].

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RngStream;

/// Public frequency and phase of the wave variant. Both parties use the
/// same values, so superposed sinusoids add amplitude-wise and these never
/// enter the arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveParams {
    pub omega: f64,
    pub phi: f64,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            phi: 0.0,
        }
    }
}

/// A value read off the shared medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublicMeasurement(f64);

impl PublicMeasurement {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    contributions: BTreeMap<String, f64>,
    noise_sigma: f64,
}

impl ChannelState {
    pub fn new(noise_sigma: f64) -> Self {
        assert!(
            noise_sigma.is_finite() && noise_sigma >= 0.0,
            "noise_sigma must be finite and non-negative"
        );
        Self {
            contributions: BTreeMap::new(),
            noise_sigma,
        }
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// Replace `who`'s contribution. Contributions may be negative.
    pub fn set_contribution(&mut self, who: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue(value));
        }
        match self.contributions.get_mut(who) {
            Some(v) => *v = value,
            None => {
                self.contributions.insert(who.to_string(), value);
            }
        }
        Ok(())
    }

    /// Noise-free sum of all contributions, in contributor-id order.
    pub fn superpose(&self) -> f64 {
        self.contributions.values().fold(0.0, |acc, v| acc + v)
    }

    pub fn measure(&self, rng: &mut RngStream) -> PublicMeasurement {
        let ideal = self.superpose();
        if self.noise_sigma == 0.0 {
            return PublicMeasurement(ideal);
        }
        let normal = Normal::new(0.0, self.noise_sigma).expect("sigma validated in new");
        PublicMeasurement(ideal + normal.sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::streams;
    use proptest::prelude::*;

    fn rng() -> RngStream {
        RngStream::new(1, streams::CHANNEL_NOISE)
    }

    #[test]
    fn empty_channel_is_zero() {
        assert_eq!(ChannelState::new(0.0).superpose(), 0.0);
    }

    #[test]
    fn single_contributor() {
        let mut c = ChannelState::new(0.0);
        c.set_contribution("alice", 3.0).unwrap();
        assert_eq!(c.superpose(), 3.0);
    }

    #[test]
    fn set_replaces() {
        let mut c = ChannelState::new(0.0);
        c.set_contribution("alice", 3.0).unwrap();
        c.set_contribution("alice", 4.0).unwrap();
        assert_eq!(c.superpose(), 4.0);
    }

    #[test]
    fn two_and_three_contributors() {
        let mut c = ChannelState::new(0.0);
        c.set_contribution("alice", 3.0).unwrap();
        c.set_contribution("bob", 5.0).unwrap();
        assert_eq!(c.superpose(), 8.0);
        c.set_contribution("adversary", -2.0).unwrap();
        assert_eq!(c.superpose(), 6.0);
    }

    #[test]
    fn rejects_non_finite() {
        let mut c = ChannelState::new(0.0);
        assert_eq!(
            c.set_contribution("alice", f64::INFINITY),
            Err(Error::NonFiniteValue(f64::INFINITY))
        );
        assert!(c.set_contribution("alice", f64::NAN).is_err());
        assert_eq!(c.superpose(), 0.0);
    }

    #[test]
    fn noiseless_measure_is_exact_and_draws_nothing() {
        let mut c = ChannelState::new(0.0);
        c.set_contribution("alice", 3.0).unwrap();
        c.set_contribution("bob", 5.0).unwrap();
        let mut r = rng();
        let before = r.clone();
        assert_eq!(c.measure(&mut r).value(), 8.0);
        // No draw consumed on the noiseless path.
        use rand::RngCore;
        assert_eq!(r.clone().next_u64(), before.clone().next_u64());
    }

    #[test]
    fn noisy_measure_replays() {
        let mut c = ChannelState::new(0.1);
        c.set_contribution("alice", 3.0).unwrap();
        c.set_contribution("bob", 5.0).unwrap();
        let a: Vec<f64> = {
            let mut r = rng();
            (0..10).map(|_| c.measure(&mut r).value()).collect()
        };
        let b: Vec<f64> = {
            let mut r = rng();
            (0..10).map(|_| c.measure(&mut r).value()).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().any(|v| *v != 8.0));
    }

    #[test]
    fn noise_is_zero_mean() {
        let mut c = ChannelState::new(0.1);
        c.set_contribution("alice", 3.0).unwrap();
        c.set_contribution("bob", 5.0).unwrap();
        let mut r = rng();
        let n = 100_000;
        let mean = (0..n).map(|_| c.measure(&mut r).value() - 8.0).sum::<f64>() / n as f64;
        let bound = 3.0 * 0.1 / (n as f64).sqrt();
        assert!(mean.abs() <= bound, "mean {mean} outside ±{bound}");
    }

    /// Exact sum of binary floats via a scaled big-integer accumulator.
    fn exact_sum(values: &[f64]) -> f64 {
        // Every finite f64 is m·2^e with e ≥ -1074; scale all to 2^-1074.
        use num_rational::BigRational;
        use num_rational::Ratio;
        let mut acc = BigRational::from_integer(0.into());
        for &v in values {
            acc += Ratio::from_float(v).unwrap();
        }
        let (n, d) = (acc.numer().clone(), acc.denom().clone());
        // Values here are modest, so an f64 division of the parts is exact enough
        // to define the reference within one rounding.
        let nf: f64 = n.to_string().parse().unwrap();
        let df: f64 = d.to_string().parse().unwrap();
        nf / df
    }

    proptest! {
        #[test]
        fn superpose_is_additive(values in prop::collection::vec(-1.0e6f64..1.0e6, 0..=16)) {
            let mut c = ChannelState::new(0.0);
            for (i, v) in values.iter().enumerate() {
                c.set_contribution(&format!("p{i:02}"), *v).unwrap();
            }
            let reference = exact_sum(&values);
            let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            let tol = 16.0 * f64::EPSILON * scale;
            prop_assert!((c.superpose() - reference).abs() <= tol);
        }

        #[test]
        fn output_depends_only_on_the_sum(
            parts in prop::collection::vec(-1000i32..1000, 1..8),
            cut in 0usize..8,
            seed in any::<u64>(),
        ) {
            // Two integer-valued splits of the same total.
            let total: i64 = parts.iter().map(|&p| p as i64).sum();
            let cut = cut.min(parts.len());
            let left: i64 = parts[..cut].iter().map(|&p| p as i64).sum();
            let mut one = ChannelState::new(0.0);
            for (i, p) in parts.iter().enumerate() {
                one.set_contribution(&format!("p{i}"), *p as f64).unwrap();
            }
            let mut two = ChannelState::new(0.0);
            two.set_contribution("alice", left as f64).unwrap();
            two.set_contribution("bob", (total - left) as f64).unwrap();
            let mut r1 = RngStream::new(seed, streams::CHANNEL_NOISE);
            let mut r2 = RngStream::new(seed, streams::CHANNEL_NOISE);
            prop_assert_eq!(one.measure(&mut r1), two.measure(&mut r2));
        }
    }
}
