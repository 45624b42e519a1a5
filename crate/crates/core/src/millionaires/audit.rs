//! What a public-space auditor learns beyond the ordering bit.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_rational::Ratio;
use serde::Serialize;

use super::{
    comparator_for, mark_tick, run_comparison, Comparator, ComparisonOutcome, Observable, Ordering,
};
use crate::adversary::entropy_bits;
use crate::error::{Error, Result};
use crate::sim::{Interval, Scenario};

/// Exact leakage enumeration is capped at this many domain values.
pub const MAX_ENUMERATED_DOMAIN: u64 = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum Finding {
    /// Slope of the public level series.
    DifferenceLeaked {
        b_minus_a: f64,
    },
    /// The lowest floor without open doors is Bob's boarding floor.
    BobSecretRevealed {
        value: u64,
    },
    MaxRevealed {
        mark_tick: u64,
        candidates: Vec<u64>,
    },
    /// Write intervals in the shared string are the two speeds.
    RatesRevealed {
        a: u64,
        b: u64,
    },
    /// Digit-wise runs reveal how many leading digits agree.
    CommonPrefix {
        digits: u32,
    },
    Leakage(LeakageSummary),
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DifferenceLeaked { b_minus_a } => {
                write!(f, "difference leaked: b-a = {b_minus_a}")
            }
            Finding::BobSecretRevealed { value } => write!(f, "bob's secret revealed: b = {value}"),
            Finding::MaxRevealed {
                mark_tick,
                candidates,
            } => write!(f, "mark at tick {mark_tick}: max(a,b) in {candidates:?}"),
            Finding::RatesRevealed { a, b } => write!(f, "rates revealed: a = {a}, b = {b}"),
            Finding::CommonPrefix { digits } => write!(f, "common prefix length: {digits} digits"),
            Finding::Leakage(l) => write!(
                f,
                "public observables carry {:.3} bits vs {:.3} bits for the ordering (excess {:.3}){}",
                l.leaked_bits,
                l.ordering_bits,
                l.excess_bits,
                if l.exceeds_one_bit {
                    ": LEAKAGE EXCEEDS ONE BIT"
                } else {
                    ""
                }
            ),
        }
    }
}

/// Information the public observables carry about `(a, b)` when both are
/// uniform on the domain. Observables are a deterministic function of the
/// secrets, so the mutual information equals their entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageSummary {
    pub leaked_bits: f64,
    pub ordering_bits: f64,
    pub excess_bits: f64,
    pub exceeds_one_bit: bool,
}

/// Least-squares slope of `(tick, level)` pairs, computed exactly in
/// integers. `None` with fewer than two distinct ticks.
pub fn slope_of_levels(series: &[(u64, i64)]) -> Option<f64> {
    let n = series.len() as i128;
    let (mut st, mut sy, mut stt, mut sty) = (0i128, 0i128, 0i128, 0i128);
    for &(t, y) in series {
        let (t, y) = (t as i128, y as i128);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let den = n * stt - st * st;
    if den == 0 {
        return None;
    }
    let num = n * sty - st * sy;
    let r = Ratio::new(num, den);
    Some(*r.numer() as f64 / *r.denom() as f64)
}

pub fn audit(outcome: &ComparisonOutcome, domain: Interval, dt: Ratio<i64>) -> Vec<Finding> {
    let obs = &outcome.public_observables;
    if obs.iter().any(|o| matches!(o, Observable::Round { .. })) {
        let digits = outcome.rounds - u32::from(outcome.ordering != Ordering::Equal);
        return vec![Finding::CommonPrefix { digits }];
    }
    let mut findings = Vec::new();
    match outcome.protocol {
        Comparator::Elevator => {
            let top = obs
                .iter()
                .filter_map(|o| match o {
                    Observable::DoorOpen { floor, .. } => Some(*floor),
                    _ => None,
                })
                .max();
            findings.push(Finding::BobSecretRevealed {
                value: top.map_or(1, |f| f + 1),
            });
        }
        Comparator::Race => {
            if let Some(Observable::Mark { tick, position }) = obs.first() {
                let n = 2 * position;
                let candidates = domain
                    .iter()
                    .filter(|&v| mark_tick(n, v, dt) == *tick)
                    .collect();
                findings.push(Finding::MaxRevealed {
                    mark_tick: *tick,
                    candidates,
                });
            }
        }
        Comparator::RaceBitstring => {
            let n = obs.iter().find_map(|o| match o {
                Observable::FinalString { value, .. } => Some(value.len() as u64),
                _ => None,
            });
            let first_write_at = |pos: u64| {
                obs.iter().find_map(|o| match o {
                    Observable::Write { tick, position, .. } if *position == pos => Some(*tick),
                    _ => None,
                })
            };
            if let Some(n) = n {
                if let (Some(a), Some(b)) = (first_write_at(0), first_write_at(n - 1)) {
                    findings.push(Finding::RatesRevealed { a, b });
                }
            }
        }
        Comparator::Vessels => {
            let series: Vec<(u64, i64)> = obs
                .iter()
                .filter_map(|o| match o {
                    Observable::Level { tick, level } => Some((*tick, *level)),
                    _ => None,
                })
                .collect();
            if let Some(slope) = slope_of_levels(&series) {
                findings.push(Finding::DifferenceLeaked { b_minus_a: slope });
            }
        }
    }
    findings
}

fn entropy_of_counts<K: Hash + Eq>(counts: &HashMap<K, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    entropy_bits(counts.values().map(|&c| c as f64 / total as f64))
}

/// Enumerate every `(a, b)` in the scenario's domain, run its comparison
/// protocol, and measure how much the public observables reveal.
pub fn leakage_bits(scenario: &Scenario) -> Result<LeakageSummary> {
    if comparator_for(scenario.protocol).is_none() {
        return Err(Error::invalid("protocol", "not a comparison protocol"));
    }
    let domain = scenario.secret_domain;
    if domain.size() > MAX_ENUMERATED_DOMAIN {
        return Err(Error::Domain(format!(
            "domain of {} values exceeds the enumeration cap {MAX_ENUMERATED_DOMAIN}",
            domain.size()
        )));
    }
    let mut by_observables: HashMap<Vec<Observable>, u64> = HashMap::new();
    let mut by_ordering: HashMap<Ordering, u64> = HashMap::new();
    let mut s = scenario.clone();
    for a in domain.iter() {
        for b in domain.iter() {
            s.party_secrets.alice = a;
            s.party_secrets.bob = Some(b);
            let o = run_comparison(&s)?;
            *by_ordering.entry(o.ordering).or_default() += 1;
            *by_observables.entry(o.public_observables).or_default() += 1;
        }
    }
    let leaked_bits = entropy_of_counts(&by_observables);
    let ordering_bits = entropy_of_counts(&by_ordering);
    let excess_bits = leaked_bits - ordering_bits;
    Ok(LeakageSummary {
        leaked_bits,
        ordering_bits,
        excess_bits,
        exceeds_one_bit: excess_bits > 1.0,
    })
}
