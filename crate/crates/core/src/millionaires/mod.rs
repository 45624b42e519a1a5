//! Physical solutions of the millionaires' comparison.
//!
//! Every comparator returns a [`ComparisonOutcome`]: the ordering each party
//! ends up knowing, plus the public observables an auditor standing in the
//! public space could record. Parties only ever learn the ordering; what the
//! observables additionally give away is reported by [`audit`].

mod audit;
mod digits;
mod elevator;
mod race;
mod vessels;

pub use audit::{
    audit, leakage_bits, slope_of_levels, Finding, LeakageSummary, MAX_ENUMERATED_DOMAIN,
};
pub use digits::{compare_digitwise, decompose_base, DigitDecomposition};
pub use elevator::compare_elevator;
pub use race::{compare_race, compare_race_bitstring, compare_race_with_dt, mark_tick};
pub use vessels::{compare_vessels, compare_vessels_in, Tank, DEFAULT_TANK};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::Result;
use crate::sim::{Protocol, Scenario, SimClock, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    ALess,
    AGreater,
    Equal,
}

impl Ordering {
    pub fn of(a: u64, b: u64) -> Self {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ordering::ALess,
            std::cmp::Ordering::Greater => Ordering::AGreater,
            std::cmp::Ordering::Equal => Ordering::Equal,
        }
    }

    /// Expected protocol answer for `(a, b)` under `convention`.
    pub fn expected(a: u64, b: u64, convention: TieConvention) -> Self {
        match (Self::of(a, b), convention) {
            (Ordering::Equal, TieConvention::CollapsedIntoAGreater) => Ordering::AGreater,
            (o, _) => o,
        }
    }
}

/// How a comparator reports `a == b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieConvention {
    /// Ties are observable and reported as `Equal`.
    Exact,
    /// Ties are indistinguishable from `a > b`; `AGreater` means `a >= b`.
    CollapsedIntoAGreater,
}

/// What a party knows at the end of a run: the ordering, nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Knowledge {
    pub ordering: Ordering,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    DoorOpen {
        tick: u64,
        floor: u64,
    },
    Mark {
        tick: u64,
        position: u64,
    },
    Write {
        tick: u64,
        position: u64,
        symbol: char,
    },
    FinalString {
        tick: u64,
        value: String,
    },
    Level {
        tick: u64,
        level: i64,
    },
    Round {
        index: u32,
    },
}

impl Observable {
    fn tick(&self) -> u64 {
        match self {
            Observable::DoorOpen { tick, .. }
            | Observable::Mark { tick, .. }
            | Observable::Write { tick, .. }
            | Observable::FinalString { tick, .. }
            | Observable::Level { tick, .. } => *tick,
            Observable::Round { .. } => 0,
        }
    }

    fn label(&self) -> String {
        match self {
            Observable::DoorOpen { floor, .. } => format!("doors-open@floor{floor}"),
            Observable::Mark { position, .. } => format!("mark@{position}"),
            Observable::Write {
                position, symbol, ..
            } => format!("cell{position}={symbol}"),
            Observable::FinalString { value, .. } => format!("string={value}"),
            Observable::Level { level, .. } => format!("level={level}"),
            Observable::Round { index } => format!("round{index}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Elevator,
    Race,
    RaceBitstring,
    Vessels,
}

impl Comparator {
    pub const ALL: [Comparator; 4] = [
        Comparator::Elevator,
        Comparator::Race,
        Comparator::RaceBitstring,
        Comparator::Vessels,
    ];

    /// Compare two shifted digits in `[1, m]` with this protocol. Unlike a
    /// plain elevator run, ties must be told apart here, so the elevator is
    /// run a second time with the roles swapped.
    pub(crate) fn compare_digit(self, a: u64, b: u64, m: u64) -> Result<ComparisonOutcome> {
        match self {
            Comparator::Elevator => {
                let first = compare_elevator(a, b, m)?;
                if first.ordering == Ordering::ALess {
                    return Ok(first);
                }
                let swapped = compare_elevator(b, a, m)?;
                let ordering = if swapped.ordering == Ordering::ALess {
                    Ordering::AGreater
                } else {
                    Ordering::Equal
                };
                let mut public_observables = first.public_observables;
                public_observables.extend(swapped.public_observables);
                Ok(ComparisonOutcome::new(
                    Comparator::Elevator,
                    ordering,
                    TieConvention::Exact,
                    public_observables,
                ))
            }
            Comparator::Race => compare_race(a, b, 2 * m),
            Comparator::RaceBitstring => compare_race_bitstring(a, b, 2 * m),
            Comparator::Vessels => compare_vessels(a, b, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonOutcome {
    pub protocol: Comparator,
    pub ordering: Ordering,
    pub tie_convention: TieConvention,
    pub alice_knows: Knowledge,
    pub bob_knows: Knowledge,
    /// Auditor-only view of the public space.
    pub public_observables: Vec<Observable>,
    /// Number of sub-protocol runs (1 unless digit-wise).
    pub rounds: u32,
}

impl ComparisonOutcome {
    pub(crate) fn new(
        protocol: Comparator,
        ordering: Ordering,
        tie_convention: TieConvention,
        public_observables: Vec<Observable>,
    ) -> Self {
        // Both parties end up with the ordering after the final disclosure.
        let knows = Knowledge { ordering };
        Self {
            protocol,
            ordering,
            tie_convention,
            alice_knows: knows,
            bob_knows: knows,
            public_observables,
            rounds: 1,
        }
    }

    /// Public observables as transcript marks, in tick order.
    pub fn to_transcript(&self) -> Transcript {
        let mut marks: Vec<(u64, String)> = self
            .public_observables
            .iter()
            .filter(|o| !matches!(o, Observable::Round { .. }))
            .map(|o| (o.tick(), o.label()))
            .collect();
        marks.sort_by_key(|(t, _)| *t);
        let mut t = Transcript::new();
        for (tick, label) in marks {
            t.mark(tick, label);
        }
        t
    }
}

/// Run the comparison selected by `scenario.protocol` on the party secrets.
pub fn run_comparison(s: &Scenario) -> Result<ComparisonOutcome> {
    let a = s.party_secrets.alice;
    let b = s.bob_secret()?;
    match s.protocol {
        Protocol::Elevator => compare_elevator(a, b, s.secret_domain.n2),
        Protocol::Race => {
            let clock = SimClock::from_seconds(s.dt)?;
            compare_race_with_dt(a, b, s.track_length(), clock.dt())
        }
        Protocol::RaceBitstring => compare_race_bitstring(a, b, s.track_length()),
        Protocol::Vessels => compare_vessels(a, b, s.hold_ticks),
        Protocol::DecoyForce | Protocol::DecoyWave => Err(crate::error::Error::invalid(
            "protocol",
            "not a comparison protocol",
        )),
    }
}

pub(crate) fn comparator_for(protocol: Protocol) -> Option<Comparator> {
    match protocol {
        Protocol::Elevator => Some(Comparator::Elevator),
        Protocol::Race => Some(Comparator::Race),
        Protocol::RaceBitstring => Some(Comparator::RaceBitstring),
        Protocol::Vessels => Some(Comparator::Vessels),
        _ => None,
    }
}

pub(crate) fn unit_dt() -> Ratio<i64> {
    Ratio::from_integer(1)
}
