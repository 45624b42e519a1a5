//! Deterministic discrete-time engine: clock, scenarios, seeded streams,
//! the public transcript and scenario dispatch.

mod config;
mod rng;
mod scenario;
mod transcript;

pub use config::{load_scenario, parse_assignment, parse_scenario};
pub use rng::{streams, RngStream};
pub use scenario::{AdversaryKind, Interval, PartySecrets, Protocol, RampModel, Scenario};
pub use transcript::{replay_digest, Transcript, TranscriptEntry, EMPTY_DIGEST};

use num_rational::Ratio;
use serde::Serialize;

use crate::adversary::{attack_impersonate, attack_jam, AttackOutcome};
use crate::decoy::{run_decoy_transmission, DecoyOutcome};
use crate::error::{Error, Result};
use crate::millionaires::{run_comparison, ComparisonOutcome};

/// Discrete simulation time. `dt` is kept as an exact ratio so that
/// tick conversions (e.g. the race mark) are free of rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    t: u64,
    dt: Ratio<i64>,
}

impl SimClock {
    pub fn new(dt: Ratio<i64>) -> Result<Self> {
        if dt <= Ratio::from_integer(0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        Ok(Self { t: 0, dt })
    }

    /// Clock for a floating-point `dt`, approximated by a small-denominator ratio.
    pub fn from_seconds(dt: f64) -> Result<Self> {
        let r = Ratio::<i64>::approximate_float(dt)
            .ok_or_else(|| Error::invalid("dt", format!("{dt} is not representable")))?;
        Self::new(r)
    }

    pub fn tick(&self) -> u64 {
        self.t
    }

    pub fn dt(&self) -> Ratio<i64> {
        self.dt
    }

    pub fn advance(&mut self) {
        self.t += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    Decoy(DecoyOutcome),
    Comparison {
        outcome: ComparisonOutcome,
        transcript: Transcript,
    },
    Attack(AttackOutcome),
}

impl RunOutcome {
    pub fn transcript(&self) -> &Transcript {
        match self {
            RunOutcome::Decoy(d) => &d.transcript,
            RunOutcome::Comparison { transcript, .. } => transcript,
            RunOutcome::Attack(a) => &a.transcript,
        }
    }

    pub fn digest(&self) -> u64 {
        replay_digest(self.transcript())
    }

    /// Number of ticks the run consumed.
    pub fn ticks(&self) -> u64 {
        self.transcript().last_tick().map_or(0, |t| t + 1)
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<RunOutcome> {
    scenario.validate()?;
    log::debug!(
        "run {} seed={} adversary={:?}",
        scenario.protocol.name(),
        scenario.seed,
        scenario.adversary
    );
    let outcome = if scenario.protocol.is_decoy() {
        match scenario.adversary {
            AdversaryKind::None | AdversaryKind::Passive => {
                RunOutcome::Decoy(run_decoy_transmission(scenario)?)
            }
            AdversaryKind::Jammer => RunOutcome::Attack(attack_jam(scenario)?),
            AdversaryKind::Impersonator => RunOutcome::Attack(attack_impersonate(scenario)?),
        }
    } else {
        let outcome = run_comparison(scenario)?;
        let transcript = outcome.to_transcript();
        RunOutcome::Comparison {
            outcome,
            transcript,
        }
    };
    Ok(outcome)
}
