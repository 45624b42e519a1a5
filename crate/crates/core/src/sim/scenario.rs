//! Scenario description and validation.

use serde::{Deserialize, Serialize};

use crate::channel::WaveParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    DecoyForce,
    DecoyWave,
    Elevator,
    Race,
    RaceBitstring,
    Vessels,
}

impl Protocol {
    pub fn is_decoy(self) -> bool {
        matches!(self, Protocol::DecoyForce | Protocol::DecoyWave)
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::DecoyForce => "decoy_force",
            Protocol::DecoyWave => "decoy_wave",
            Protocol::Elevator => "elevator",
            Protocol::Race => "race",
            Protocol::RaceBitstring => "race_bitstring",
            Protocol::Vessels => "vessels",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampModel {
    /// Both parties jump straight to their targets on the same tick.
    Synchronous,
    #[default]
    RandomRamp,
    /// Leaky negative control: the sender climbs one unit per tick, so the
    /// length of her ramp equals her secret. The receiver jumps as in
    /// `Synchronous`.
    DeterministicRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    #[default]
    None,
    Passive,
    Jammer,
    Impersonator,
}

/// Closed integer interval `[n1, n2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub n1: u64,
    pub n2: u64,
}

impl Interval {
    pub fn new(n1: u64, n2: u64) -> Self {
        assert!(n1 <= n2, "empty interval [{n1}, {n2}]");
        Self { n1, n2 }
    }

    pub fn contains(&self, x: u64) -> bool {
        (self.n1..=self.n2).contains(&x)
    }

    /// Number of integers in the interval.
    pub fn size(&self) -> u64 {
        self.n2 - self.n1 + 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.n1..=self.n2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartySecrets {
    pub alice: u64,
    /// Absent when the receiver is replaced by an impersonator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<u64>,
}

fn default_dt() -> f64 {
    1.0
}
fn default_max_ticks() -> u64 {
    1000
}
fn default_hold_ticks() -> u64 {
    5
}
fn default_true() -> bool {
    true
}
fn default_max_ramp_ticks() -> u64 {
    16
}
fn default_jam_value() -> f64 {
    -2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub protocol: Protocol,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    pub secret_domain: Interval,
    pub party_secrets: PartySecrets,
    #[serde(default)]
    pub ramp_model: RampModel,
    #[serde(default = "default_hold_ticks")]
    pub hold_ticks: u64,
    #[serde(default)]
    pub epsilon_stab: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub adversary: AdversaryKind,
    #[serde(default = "default_true")]
    pub defense_enabled: bool,

    /// Upper bound on a random ramp's length in ticks.
    #[serde(default = "default_max_ramp_ticks")]
    pub max_ramp_ticks: u64,
    /// Force the jammer adds once the public total looks stable.
    #[serde(default = "default_jam_value")]
    pub jam_value: f64,
    /// Contribution of an impersonator that forges the "in-business"
    /// announcement. `None` means a silent impersonator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forged_key: Option<f64>,
    #[serde(default)]
    pub wave: WaveParams,
}

impl Scenario {
    /// A scenario with default tuning for the given protocol and secrets.
    pub fn new(protocol: Protocol, secret_domain: Interval, alice: u64, bob: Option<u64>) -> Self {
        Self {
            protocol,
            seed: 0,
            dt: default_dt(),
            max_ticks: default_max_ticks(),
            secret_domain,
            party_secrets: PartySecrets { alice, bob },
            ramp_model: RampModel::default(),
            hold_ticks: default_hold_ticks(),
            epsilon_stab: 0.0,
            noise_sigma: 0.0,
            adversary: AdversaryKind::None,
            defense_enabled: true,
            max_ramp_ticks: default_max_ramp_ticks(),
            jam_value: default_jam_value(),
            forged_key: None,
            wave: WaveParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ramp(mut self, model: RampModel) -> Self {
        self.ramp_model = model;
        self
    }

    pub fn with_adversary(mut self, adversary: AdversaryKind) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn bob_secret(&self) -> Result<u64> {
        self.party_secrets
            .bob
            .ok_or_else(|| Error::invalid("party_secrets.bob", "required for this protocol"))
    }

    /// Track length for the race protocols: `N2 - N1`, rounded up to even.
    pub fn track_length(&self) -> u64 {
        let span = self.secret_domain.n2 - self.secret_domain.n1;
        span + span % 2
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.secret_domain;
        if d.n1 < 1 {
            return Err(Error::invalid("secret_domain.n1", "must be at least 1"));
        }
        if d.n2 <= d.n1 {
            return Err(Error::invalid(
                "secret_domain.n1",
                format!(
                    "n1 ({}) must be less than secret_domain.n2 ({})",
                    d.n1, d.n2
                ),
            ));
        }
        if !d.contains(self.party_secrets.alice) {
            return Err(Error::invalid(
                "party_secrets.alice",
                format!("{} outside [{}, {}]", self.party_secrets.alice, d.n1, d.n2),
            ));
        }
        if let Some(b) = self.party_secrets.bob {
            if !d.contains(b) {
                return Err(Error::invalid(
                    "party_secrets.bob",
                    format!("{b} outside [{}, {}]", d.n1, d.n2),
                ));
            }
        }
        let needs_bob =
            !(self.protocol.is_decoy() && self.adversary == AdversaryKind::Impersonator);
        if needs_bob && self.party_secrets.bob.is_none() {
            return Err(Error::invalid(
                "party_secrets.bob",
                "required for this protocol",
            ));
        }
        if self.max_ticks == 0 {
            return Err(Error::invalid("max_ticks", "must be positive"));
        }
        if self.hold_ticks == 0 {
            return Err(Error::invalid("hold_ticks", "must be positive"));
        }
        if self.max_ticks <= self.hold_ticks {
            return Err(Error::invalid(
                "max_ticks",
                format!("must exceed hold_ticks ({})", self.hold_ticks),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be a positive finite number"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid(
                "noise_sigma",
                "must be finite and non-negative",
            ));
        }
        if !(self.epsilon_stab.is_finite() && self.epsilon_stab >= 0.0) {
            return Err(Error::invalid(
                "epsilon_stab",
                "must be finite and non-negative",
            ));
        }
        if self.max_ramp_ticks == 0 {
            return Err(Error::invalid("max_ramp_ticks", "must be positive"));
        }
        if !self.jam_value.is_finite() {
            return Err(Error::invalid("jam_value", "must be finite"));
        }
        if let Some(f) = self.forged_key {
            if !f.is_finite() {
                return Err(Error::invalid("forged_key", "must be finite"));
            }
        }
        if !(self.wave.omega.is_finite() && self.wave.phi.is_finite()) {
            return Err(Error::invalid("wave", "omega and phi must be finite"));
        }
        if !self.protocol.is_decoy()
            && matches!(
                self.adversary,
                AdversaryKind::Jammer | AdversaryKind::Impersonator
            )
        {
            return Err(Error::invalid(
                "adversary",
                "active adversaries apply only to decoy protocols",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::new(Protocol::DecoyForce, Interval::new(1, 100), 3, Some(5))
    }

    fn key_of(s: &Scenario) -> String {
        match s.validate() {
            Err(Error::InvalidScenario { key, .. }) => key,
            other => panic!("expected InvalidScenario, got {other:?}"),
        }
    }

    #[test]
    fn default_scenario_is_valid() {
        base().validate().unwrap();
    }

    #[test]
    fn zero_max_ticks_is_invalid() {
        let mut s = base();
        s.max_ticks = 0;
        assert_eq!(key_of(&s), "max_ticks");
    }

    #[test]
    fn hold_must_be_below_max_ticks() {
        let mut s = base();
        s.hold_ticks = s.max_ticks;
        assert_eq!(key_of(&s), "max_ticks");
        s.hold_ticks = 0;
        assert_eq!(key_of(&s), "hold_ticks");
    }

    #[test]
    fn inverted_domain_names_n1() {
        let mut s = base();
        s.secret_domain = Interval { n1: 50, n2: 10 };
        assert_eq!(key_of(&s), "secret_domain.n1");
    }

    #[test]
    fn secrets_must_lie_in_domain() {
        let mut s = base();
        s.party_secrets.bob = Some(101);
        assert_eq!(key_of(&s), "party_secrets.bob");
        s.party_secrets.bob = None;
        assert_eq!(key_of(&s), "party_secrets.bob");
        s.adversary = AdversaryKind::Impersonator;
        s.validate().unwrap();
    }

    #[test]
    fn active_adversary_rejected_for_comparisons() {
        let s = Scenario::new(Protocol::Vessels, Interval::new(1, 10), 5, Some(3))
            .with_adversary(AdversaryKind::Jammer);
        assert_eq!(key_of(&s), "adversary");
    }

    #[test]
    fn track_length_is_even() {
        let mut s = base();
        assert_eq!(s.track_length(), 100);
        s.secret_domain = Interval::new(1, 30);
        assert_eq!(s.track_length(), 30);
        s.secret_domain = Interval::new(1, 2);
        assert_eq!(s.track_length(), 2);
    }
}
