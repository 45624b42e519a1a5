//! Threat models: the passive unbounded observer and two active attacks.
//!
//! Adversaries see only the public [`Transcript`](crate::sim::Transcript);
//! channel contributions are never exposed to them.

mod attacks;
mod mi;
mod posterior;
mod splits;

pub use attacks::{attack_impersonate, attack_jam, AttackOutcome};
pub use mi::{entropy_bits, estimate_mutual_information, MIN_MI_SAMPLES};
pub use posterior::{
    estimate_posterior, generate_samples, passive_posterior, posterior_from_features,
    FeatureExtractor, FeatureVector, PosteriorReport, RampFeatures, Sample, SplitPosterior,
    DEFAULT_MIN_PER_CLASS,
};
pub use splits::{
    analytic_posterior, enumerate_splits, enumerate_splits_with_keys, sum_channel_information,
    SplitSet,
};
