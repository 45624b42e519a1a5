//! The race track and its shared-bit-string emulation.

use num_rational::Ratio;

use super::{unit_dt, Comparator, ComparisonOutcome, Observable, Ordering, TieConvention};
use crate::error::{Error, Result};

fn check_speeds(a: u64, b: u64, n: u64) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::Domain(format!(
            "speeds must be positive, got a={a}, b={b}"
        )));
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "track length {n} must be even and at least 2"
        )));
    }
    if n > i64::MAX as u64 || a > i64::MAX as u64 || b > i64::MAX as u64 {
        return Err(Error::Domain(
            "parameters exceed the exact-time range".into(),
        ));
    }
    Ok(())
}

/// Tick on which a runner at `speed` reaches the midpoint of a track of
/// length `n`: `ceil((n/2) / (speed * dt))`.
pub fn mark_tick(n: u64, speed: u64, dt: Ratio<i64>) -> u64 {
    let time = Ratio::new((n / 2) as i64, speed as i64);
    (time / dt).ceil().to_integer() as u64
}

pub fn compare_race(a: u64, b: u64, n: u64) -> Result<ComparisonOutcome> {
    compare_race_with_dt(a, b, n, unit_dt())
}

/// Alice runs from 0 at speed `a`, Bob from `n` at speed `b`. Arrival
/// times at the midpoint are compared exactly; the first arrival leaves a
/// public mark, which is recorded on its (rounded-up) tick.
pub fn compare_race_with_dt(a: u64, b: u64, n: u64, dt: Ratio<i64>) -> Result<ComparisonOutcome> {
    check_speeds(a, b, n)?;
    if dt <= Ratio::from_integer(0) {
        return Err(Error::Domain("dt must be positive".into()));
    }
    let half = (n / 2) as i64;
    let alice_arrives = Ratio::new(half, a as i64);
    let bob_arrives = Ratio::new(half, b as i64);
    // Earlier arrival means the faster runner, i.e. the larger number.
    let ordering = match alice_arrives.cmp(&bob_arrives) {
        std::cmp::Ordering::Less => Ordering::AGreater,
        std::cmp::Ordering::Greater => Ordering::ALess,
        std::cmp::Ordering::Equal => Ordering::Equal,
    };
    let mark = Observable::Mark {
        tick: mark_tick(n, a.max(b), dt),
        position: n / 2,
    };
    Ok(ComparisonOutcome::new(
        Comparator::Race,
        ordering,
        TieConvention::Exact,
        vec![mark],
    ))
}

/// Alice zeroes the string left to right, one symbol every `a` ticks; Bob
/// right to left every `b` ticks. Each writes `X` instead of `0` on its
/// `n/2`-th symbol and stops. Whoever stops first has the smaller number.
pub fn compare_race_bitstring(a: u64, b: u64, n: u64) -> Result<ComparisonOutcome> {
    check_speeds(a, b, n)?;
    let half = n / 2;
    let symbol = |k: u64| if k == half { 'X' } else { '0' };
    // Same-tick writes are ordered Alice first.
    let mut writes: Vec<(u64, u8, u64, char)> = (1..=half)
        .map(|k| (k * a, 0, k - 1, symbol(k)))
        .chain((1..=half).map(|k| (k * b, 1, n - k, symbol(k))))
        .collect();
    writes.sort_unstable();

    let mut cells = vec!['1'; n as usize];
    let mut observables = Vec::with_capacity(writes.len() + 1);
    for &(tick, _, position, sym) in &writes {
        cells[position as usize] = sym;
        observables.push(Observable::Write {
            tick,
            position,
            symbol: sym,
        });
    }
    let alice_stops = half * a;
    let bob_stops = half * b;
    let ordering = match alice_stops.cmp(&bob_stops) {
        std::cmp::Ordering::Less => Ordering::ALess,
        std::cmp::Ordering::Greater => Ordering::AGreater,
        std::cmp::Ordering::Equal => Ordering::Equal,
    };
    observables.push(Observable::FinalString {
        tick: alice_stops.max(bob_stops),
        value: cells.into_iter().collect(),
    });
    Ok(ComparisonOutcome::new(
        Comparator::RaceBitstring,
        ordering,
        TieConvention::Exact,
        observables,
    ))
}
