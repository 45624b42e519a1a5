//! Reducing large ranges to per-digit comparisons.

use serde::Serialize;

use super::{Comparator, ComparisonOutcome, Observable, Ordering, TieConvention};
use crate::error::{Error, Result};

/// `x = high * base + low` with `0 <= low < base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DigitDecomposition {
    pub base: u64,
    pub high: u64,
    pub low: u64,
}

impl DigitDecomposition {
    pub fn value(&self) -> u64 {
        self.high * self.base + self.low
    }
}

pub fn decompose_base(x: u64, m: u64) -> Result<DigitDecomposition> {
    if m < 2 {
        return Err(Error::Domain(format!("base {m} must be at least 2")));
    }
    Ok(DigitDecomposition {
        base: m,
        high: x / m,
        low: x % m,
    })
}

/// Base-`m` digits, most significant first.
fn digits(mut x: u64, m: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    loop {
        let d = decompose_base(x, m)?;
        out.push(d.low);
        if d.high == 0 {
            break;
        }
        x = d.high;
    }
    out.reverse();
    Ok(out)
}

/// Compare `a` and `b` one base-`m` digit at a time from the left, running
/// `comparator` on each digit pair shifted into `[1, m]`. The first unequal
/// digit decides. `rounds` counts the sub-protocol runs, which reveals the
/// length of the common prefix.
pub fn compare_digitwise(
    a: u64,
    b: u64,
    m: u64,
    comparator: Comparator,
) -> Result<ComparisonOutcome> {
    let mut da = digits(a, m)?;
    let mut db = digits(b, m)?;
    let width = da.len().max(db.len());
    for d in [&mut da, &mut db] {
        let pad = width - d.len();
        d.splice(0..0, std::iter::repeat_n(0, pad));
    }

    let mut observables = Vec::new();
    let mut ordering = Ordering::Equal;
    let mut rounds = 0;
    for (x, y) in da.iter().zip(&db) {
        observables.push(Observable::Round { index: rounds });
        let sub = comparator.compare_digit(x + 1, y + 1, m)?;
        rounds += 1;
        observables.extend(sub.public_observables);
        if sub.ordering != Ordering::Equal {
            ordering = sub.ordering;
            break;
        }
    }
    let mut outcome =
        ComparisonOutcome::new(comparator, ordering, TieConvention::Exact, observables);
    outcome.rounds = rounds;
    Ok(outcome)
}
