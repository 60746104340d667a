//! Earliest feasible start times for placing one operation.

use crate::error::{Error, Result};
use crate::Minute;

use super::{CapacityProfile, TimeWindowSet, MINUTES_PER_DAY, UNBOUNDED};

/// How far past `t_min` a start time may be searched before giving up.
pub const DEFAULT_SEARCH_HORIZON: Minute = 366 * MINUTES_PER_DAY;

/// Smallest `t >= t_min` such that the setup can be launched at `t` (`t` lies in
/// an operator window) and a column unit is free over `[t, t + setup + processing)`.
pub fn earliest_start_with_setup(
    t_min: Minute,
    setup: Minute,
    processing: Minute,
    operator: &TimeWindowSet,
    column: &CapacityProfile,
) -> Result<Minute> {
    earliest_start_with_setup_within(
        t_min,
        setup,
        processing,
        operator,
        column,
        DEFAULT_SEARCH_HORIZON,
    )
}

pub fn earliest_start_with_setup_within(
    t_min: Minute,
    setup: Minute,
    processing: Minute,
    operator: &TimeWindowSet,
    column: &CapacityProfile,
    horizon: Minute,
) -> Result<Minute> {
    let no_slot = Error::NoSlot {
        from: t_min,
        horizon,
    };
    let limit = t_min.saturating_add(horizon);
    let span = setup + processing;
    let mut t = t_min;
    loop {
        t = match operator.next_at_or_after(t) {
            Some(t) if t <= limit => t,
            _ => return Err(no_slot),
        };
        match column.first_blocked_in(t, t.saturating_add(span)) {
            None => return Ok(t),
            Some((_, end)) if end == UNBOUNDED => return Err(no_slot),
            Some((_, end)) => t = end,
        }
    }
}

/// Smallest `t >= t_min` with a column unit free over `[t, t + processing)`. No
/// operator is needed when the column is already mounted.
pub fn earliest_start_without_setup(
    t_min: Minute,
    processing: Minute,
    column: &CapacityProfile,
) -> Result<Minute> {
    earliest_start_without_setup_within(t_min, processing, column, DEFAULT_SEARCH_HORIZON)
}

pub fn earliest_start_without_setup_within(
    t_min: Minute,
    processing: Minute,
    column: &CapacityProfile,
    horizon: Minute,
) -> Result<Minute> {
    earliest_start_with_setup_within(
        t_min,
        0,
        processing,
        &TimeWindowSet::always(),
        column,
        horizon,
    )
}
