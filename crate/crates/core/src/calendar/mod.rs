//! Interval algebra for operator windows and column availability.
//!
//! All intervals are half-open `[start, end)` in integer minutes, so back-to-back
//! placements never conflict. An end of [`UNBOUNDED`] stands for +∞.

mod placement;
mod profile;
mod weekly;
mod windows;

pub use placement::{
    earliest_start_with_setup, earliest_start_with_setup_within, earliest_start_without_setup,
    earliest_start_without_setup_within, DEFAULT_SEARCH_HORIZON,
};
pub use profile::CapacityProfile;
pub use weekly::{Weekday, WeeklyPattern};
pub use windows::{TimeWindowSet, UNBOUNDED};

pub const MINUTES_PER_DAY: crate::Minute = 1440;
pub const MINUTES_PER_WEEK: crate::Minute = 7 * MINUTES_PER_DAY;
