//! Communicating vessels: Alice pumps out at rate `a`, Bob pumps in at rate
//! `b`, and both watch the shared water level.

use serde::Serialize;

use super::{Comparator, ComparisonOutcome, Observable, Ordering, TieConvention};
use crate::channel::ChannelState;
use crate::decoy::{RECEIVER_ID, SENDER_ID};
use crate::error::{Error, Result};
use crate::sim::{streams, RngStream};

/// Vessel geometry in volume units. Cross-sections are unit, so volume and
/// level coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tank {
    pub initial_level: i64,
    pub capacity: i64,
}

/// Almost, but not completely, full.
pub const DEFAULT_TANK: Tank = Tank {
    initial_level: 900_000,
    capacity: 1_000_000,
};

pub fn compare_vessels(a: u64, b: u64, observation_ticks: u64) -> Result<ComparisonOutcome> {
    compare_vessels_in(DEFAULT_TANK, a, b, observation_ticks)
}

pub fn compare_vessels_in(
    tank: Tank,
    a: u64,
    b: u64,
    observation_ticks: u64,
) -> Result<ComparisonOutcome> {
    if a == 0 || b == 0 {
        return Err(Error::Domain(format!(
            "pump rates must be positive, got a={a}, b={b}"
        )));
    }
    if observation_ticks == 0 {
        return Err(Error::Domain("observation_ticks must be positive".into()));
    }
    if !(0 < tank.initial_level && tank.initial_level <= tank.capacity) {
        return Err(Error::Domain(
            "initial level must lie in (0, capacity]".into(),
        ));
    }
    // The pipe carries the superposition of both pumps; nothing is noisy here.
    let mut pipe = ChannelState::new(0.0);
    pipe.set_contribution(SENDER_ID, -(a as f64))?;
    pipe.set_contribution(RECEIVER_ID, b as f64)?;
    let mut rng = RngStream::new(0, streams::CHANNEL_NOISE);

    let mut level = tank.initial_level;
    let mut series = Vec::with_capacity(observation_ticks as usize + 1);
    series.push(Observable::Level { tick: 0, level });
    for tick in 1..=observation_ticks {
        level += pipe.measure(&mut rng).value() as i64;
        if level <= 0 {
            return Err(Error::VesselEmpty { tick });
        }
        if level > tank.capacity {
            return Err(Error::VesselOverflow { tick });
        }
        series.push(Observable::Level { tick, level });
    }
    let ordering = match level.cmp(&tank.initial_level) {
        std::cmp::Ordering::Less => Ordering::AGreater,
        std::cmp::Ordering::Greater => Ordering::ALess,
        std::cmp::Ordering::Equal => Ordering::Equal,
    };
    Ok(ComparisonOutcome::new(
        Comparator::Vessels,
        ordering,
        TieConvention::Exact,
        series,
    ))
}
