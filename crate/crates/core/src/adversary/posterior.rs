//! Empirical-Bayes posterior over the sender's secret, from transcripts only.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::attacks::{attack_impersonate, attack_jam};
use super::mi::mutual_information_unchecked;
use super::splits::analytic_posterior;
use crate::decoy::{mean, run_decoy_transmission};
use crate::error::{Error, Result};
use crate::sim::{streams, AdversaryKind, Interval, RngStream, Scenario, Transcript};

pub const DEFAULT_MIN_PER_CLASS: usize = 100;

pub type FeatureVector = Vec<i64>;

/// Reduces a transcript to a short quantized feature vector.
pub trait FeatureExtractor: Sync {
    fn extract(&self, transcript: &Transcript) -> FeatureVector;

    /// Human-readable quantization settings, echoed in reports.
    fn describe(&self) -> String;
}

/// Stable total (rounded to `total_step`) and ramp duration (in
/// `duration_bucket`-tick buckets).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampFeatures {
    /// Ticks averaged for the stable total.
    pub window: usize,
    /// Deviation treated as "no change".
    pub tolerance: f64,
    pub total_step: f64,
    pub duration_bucket: u64,
}

impl RampFeatures {
    pub fn for_scenario(s: &Scenario) -> Self {
        Self {
            window: s.hold_ticks as usize,
            tolerance: s.epsilon_stab.max(4.0 * s.noise_sigma).max(1e-9),
            total_step: 1.0,
            duration_bucket: 1,
        }
    }
}

impl FeatureExtractor for RampFeatures {
    fn extract(&self, transcript: &Transcript) -> FeatureVector {
        let values = transcript.measurement_values();
        if values.is_empty() {
            return vec![0, 0];
        }
        let tail = &values[values.len().saturating_sub(self.window.max(1))..];
        let total = mean(tail);
        let onset = values.iter().position(|v| v.abs() > self.tolerance);
        let stable_from = values
            .iter()
            .rposition(|v| (v - total).abs() > self.tolerance)
            .map_or(0, |i| i + 1);
        let duration = onset.map_or(0, |o| stable_from.saturating_sub(o)) as u64;
        vec![
            (total / self.total_step).round() as i64,
            (duration / self.duration_bucket.max(1)) as i64,
        ]
    }

    fn describe(&self) -> String {
        format!(
            "stable total over last {} ticks rounded to {}; ramp duration in buckets of {} ticks (tolerance {})",
            self.window, self.total_step, self.duration_bucket, self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorReport {
    pub domain: Interval,
    pub posterior: BTreeMap<u64, f64>,
    pub max_prob: f64,
    pub map_estimate: u64,
    /// Estimated `I(secret; features)` over the whole sample set.
    pub mi_bits: f64,
    pub samples_used: usize,
    /// Samples whose features equal the observed ones.
    pub matching_samples: usize,
    pub features: String,
}

/// Posterior from pre-extracted `(secret, features)` samples, uniform prior.
pub fn posterior_from_features(
    samples: &[(u64, FeatureVector)],
    observed: &FeatureVector,
    domain: Interval,
    min_per_class: usize,
) -> Result<PosteriorReport> {
    let mut per_class: HashMap<u64, usize> = HashMap::new();
    let mut matching: HashMap<u64, usize> = HashMap::new();
    for (s, f) in samples {
        *per_class.entry(*s).or_default() += 1;
        if f == observed {
            *matching.entry(*s).or_default() += 1;
        }
    }
    if let Some(v) = domain
        .iter()
        .find(|v| per_class.get(v).copied().unwrap_or(0) < min_per_class)
    {
        return Err(Error::InsufficientSamples(format!(
            "secret {v} has {} samples, at least {min_per_class} required",
            per_class.get(&v).copied().unwrap_or(0)
        )));
    }
    // Likelihood of the observation under each secret, times a uniform prior.
    let weights: BTreeMap<u64, f64> = domain
        .iter()
        .map(|v| {
            let c = matching.get(&v).copied().unwrap_or(0);
            (v, c as f64 / per_class[&v] as f64)
        })
        .collect();
    let z: f64 = weights.values().sum();
    if z == 0.0 {
        return Err(Error::UnmatchedObservation);
    }
    let posterior: BTreeMap<u64, f64> = weights.into_iter().map(|(v, w)| (v, w / z)).collect();
    let (&map_estimate, &max_prob) = posterior
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
        .expect("domain is non-empty");
    Ok(PosteriorReport {
        domain,
        posterior,
        max_prob,
        map_estimate,
        mi_bits: mutual_information_unchecked(samples),
        samples_used: samples.len(),
        matching_samples: matching.values().sum(),
        features: String::new(),
    })
}

pub fn estimate_posterior(
    samples: &[(u64, Transcript)],
    observed: &Transcript,
    extractor: &dyn FeatureExtractor,
    domain: Interval,
    min_per_class: usize,
) -> Result<PosteriorReport> {
    let features: Vec<(u64, FeatureVector)> = samples
        .par_iter()
        .map(|(s, t)| (*s, extractor.extract(t)))
        .collect();
    let mut report = posterior_from_features(
        &features,
        &extractor.extract(observed),
        domain,
        min_per_class,
    )?;
    report.features = extractor.describe();
    Ok(report)
}

/// Split posterior of a passive observer: the stable total (mean of the
/// last `window` measurements, minus the observer's own contribution)
/// restricted to secret and key both lying in `domain`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPosterior {
    pub total: u64,
    pub posterior: BTreeMap<u64, f64>,
    pub max_prob: f64,
}

pub fn passive_posterior(
    transcript: &Transcript,
    domain: Interval,
    window: usize,
    own_contribution: f64,
) -> Option<SplitPosterior> {
    let tail = transcript.last_measurements(window.max(1));
    if tail.is_empty() {
        return None;
    }
    let total = (mean(&tail) - own_contribution).round();
    if total < 0.0 {
        return None;
    }
    let total = total as u64;
    let posterior = analytic_posterior(total, domain, domain);
    let max_prob = posterior.values().copied().fold(0.0, f64::max);
    (!posterior.is_empty()).then_some(SplitPosterior {
        total,
        posterior,
        max_prob,
    })
}

/// One Monte-Carlo draw: fresh secret and key, seed `base + index`.
#[derive(Debug, Clone)]
pub struct Sample {
    pub secret: u64,
    pub key: u64,
    pub transcript: Transcript,
}

/// Run `n` scenarios with secret and key drawn uniformly from the domain.
/// Timed-out runs contribute the partial transcript they produced.
pub fn generate_samples(base: &Scenario, n: usize) -> Result<Vec<Sample>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = base.clone();
            s.seed = base.seed.wrapping_add(i);
            let mut rng = RngStream::new(s.seed, streams::SAMPLER);
            let d = s.secret_domain;
            let secret = rng.random_range(d.n1..=d.n2);
            let key = rng.random_range(d.n1..=d.n2);
            s.party_secrets.alice = secret;
            s.party_secrets.bob = Some(key);
            let run = match s.adversary {
                AdversaryKind::None | AdversaryKind::Passive => {
                    run_decoy_transmission(&s).map(|o| o.transcript)
                }
                AdversaryKind::Jammer => attack_jam(&s).map(|o| o.transcript),
                AdversaryKind::Impersonator => attack_impersonate(&s).map(|o| o.transcript),
            };
            let transcript = match run {
                Ok(t) => t,
                Err(Error::ProtocolTimeout { transcript, .. }) => *transcript,
                Err(e) => return Err(e),
            };
            Ok(Sample {
                secret,
                key,
                transcript,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Protocol, RampModel};

    fn base(model: RampModel) -> Scenario {
        Scenario::new(Protocol::DecoyForce, Interval::new(1, 8), 3, Some(5))
            .with_seed(1_000)
            .with_ramp(model)
    }

    fn featurize(s: &Scenario, samples: &[Sample]) -> Vec<(u64, FeatureVector)> {
        let fx = RampFeatures::for_scenario(s);
        samples
            .iter()
            .map(|x| (x.secret, fx.extract(&x.transcript)))
            .collect()
    }

    #[test]
    fn features_of_a_synchronous_run() {
        let s = base(RampModel::Synchronous);
        let t = run_decoy_transmission(&s).unwrap().transcript;
        assert_eq!(RampFeatures::for_scenario(&s).extract(&t), vec![8, 0]);
    }

    #[test]
    fn deterministic_ramp_duration_tracks_secret() {
        for a in 1..=8 {
            let mut s = base(RampModel::DeterministicRamp);
            s.party_secrets.alice = a;
            let t = run_decoy_transmission(&s).unwrap().transcript;
            assert_eq!(
                RampFeatures::for_scenario(&s).extract(&t),
                vec![a as i64 + 5, a as i64 - 1]
            );
        }
    }

    #[test]
    fn synchronous_posterior_is_uniform_over_splits() {
        let s = base(RampModel::Synchronous);
        let samples = generate_samples(&s, 10_000).unwrap();
        let features = featurize(&s, &samples);
        let observed = vec![8, 0];
        let r = posterior_from_features(&features, &observed, s.secret_domain, 100).unwrap();
        assert!((r.posterior.values().sum::<f64>() - 1.0).abs() < 1e-9);
        let exact = analytic_posterior(8, s.secret_domain, s.secret_domain);
        let sigma = ((1.0 / 7.0) * (6.0 / 7.0) / r.matching_samples as f64).sqrt();
        for v in s.secret_domain.iter() {
            let e = exact.get(&v).copied().unwrap_or(0.0);
            assert!((r.posterior[&v] - e).abs() <= 3.0 * sigma, "{v}: {r:?}");
        }
    }

    #[test]
    fn noiseless_synchronous_max_prob_is_exact() {
        // With a single total per secret class the empirical posterior is
        // exact: every matching class has identical likelihood.
        let mut s = base(RampModel::Synchronous);
        s.secret_domain = Interval::new(1, 4);
        let mut features = Vec::new();
        for a in 1..=4u64 {
            for k in 1..=4u64 {
                for _ in 0..100 {
                    features.push((a, vec![(a + k) as i64, 0]));
                }
            }
        }
        let r = posterior_from_features(&features, &vec![5, 0], s.secret_domain, 100).unwrap();
        assert_eq!(r.max_prob, 0.25);
        let r = posterior_from_features(&features, &vec![4, 0], s.secret_domain, 100).unwrap();
        assert!((r.max_prob - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_control_concentrates() {
        let s = base(RampModel::DeterministicRamp);
        let samples = generate_samples(&s, 10_000).unwrap();
        let features = featurize(&s, &samples);
        let mut t = s.clone();
        t.party_secrets = crate::sim::PartySecrets {
            alice: 4,
            bob: Some(4),
        };
        let observed =
            RampFeatures::for_scenario(&s).extract(&run_decoy_transmission(&t).unwrap().transcript);
        let r = posterior_from_features(&features, &observed, s.secret_domain, 100).unwrap();
        assert!(r.max_prob >= 0.9, "{r:?}");
        assert_eq!(r.map_estimate, 4);
    }

    #[test]
    fn random_ramp_posterior_stays_flat() {
        let s = base(RampModel::RandomRamp);
        let samples = generate_samples(&s, 10_000).unwrap();
        let features = featurize(&s, &samples);
        let observed =
            RampFeatures::for_scenario(&s).extract(&run_decoy_transmission(&s).unwrap().transcript);
        let r = posterior_from_features(&features, &observed, s.secret_domain, 100).unwrap();
        let k = analytic_posterior(8, s.secret_domain, s.secret_domain).len() as f64;
        assert!(r.max_prob <= 1.0 / k + 3.0 * (k / 10_000.0).sqrt(), "{r:?}");
    }

    #[test]
    fn control_separates_from_random_ramp() {
        let mi = |model| {
            let s = base(model);
            let samples = generate_samples(&s, 10_000).unwrap();
            mutual_information_unchecked(&featurize(&s, &samples))
        };
        let control = mi(RampModel::DeterministicRamp);
        let random = mi(RampModel::RandomRamp);
        assert!(
            control - random >= 1.0,
            "control {control}, random {random}"
        );
    }

    #[test]
    fn insufficient_and_unmatched() {
        let d = Interval::new(1, 2);
        let few = vec![(1, vec![2]), (2, vec![3])];
        assert!(matches!(
            posterior_from_features(&few, &vec![2], d, 100),
            Err(Error::InsufficientSamples(_))
        ));
        assert!(matches!(
            posterior_from_features(&few, &vec![9], d, 1),
            Err(Error::UnmatchedObservation)
        ));
    }

    #[test]
    fn samples_are_reproducible() {
        let s = base(RampModel::RandomRamp);
        let a = generate_samples(&s, 50).unwrap();
        let b = generate_samples(&s, 50).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                (x.secret, x.key, &x.transcript),
                (y.secret, y.key, &y.transcript)
            );
        }
    }

    #[test]
    fn passive_posterior_from_tail() {
        let s = base(RampModel::Synchronous);
        let t = run_decoy_transmission(&s).unwrap().transcript;
        let p = passive_posterior(&t, s.secret_domain, 5, 0.0).unwrap();
        assert_eq!(p.total, 8);
        assert_eq!(p.posterior.len(), 7);
        assert!((p.max_prob - 1.0 / 7.0).abs() < 1e-15);
    }
}
