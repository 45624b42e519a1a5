use super::{Comparator, ComparisonOutcome, Observable, Ordering, TieConvention};
use crate::error::{Error, Result};

/// Bob boards unseen at floor `b` and rides down, opening the doors at
/// every floor below. Alice waits on floor `a`: seeing the doors open
/// means `a < b`. `a == b` falls into the "not larger" branch.
pub fn compare_elevator(a: u64, b: u64, n_floors: u64) -> Result<ComparisonOutcome> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(1..=n_floors).contains(&v) {
            return Err(Error::Domain(format!(
                "{name} = {v} outside floors [1, {n_floors}]"
            )));
        }
    }
    let doors: Vec<Observable> = (1..b)
        .map(|tick| Observable::DoorOpen {
            tick,
            floor: b - tick,
        })
        .collect();
    let alice_saw_doors = doors
        .iter()
        .any(|o| matches!(o, Observable::DoorOpen { floor, .. } if *floor == a));
    let ordering = if alice_saw_doors {
        Ordering::ALess
    } else {
        Ordering::AGreater
    };
    Ok(ComparisonOutcome::new(
        Comparator::Elevator,
        ordering,
        TieConvention::CollapsedIntoAGreater,
        doors,
    ))
}
