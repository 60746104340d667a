use crate::error::{Error, Result};
use crate::Minute;

use super::UNBOUNDED;

/// Piecewise-constant number of free units of one column type.
///
/// The level equals `units` before the first breakpoint; each breakpoint
/// `(t, level)` holds until the next one. Breakpoints are kept minimal: no two
/// consecutive breakpoints carry the same level and a leading breakpoint never
/// repeats `units`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityProfile {
    units: u32,
    steps: Vec<(Minute, i64)>,
}

impl CapacityProfile {
    pub fn new(units: u32) -> Self {
        Self {
            units,
            steps: Vec::new(),
        }
    }

    pub fn units(&self) -> u32 {
        self.units
    }

    pub fn breakpoints(&self) -> &[(Minute, i64)] {
        &self.steps
    }

    pub fn level_at(&self, t: Minute) -> i64 {
        let idx = self.steps.partition_point(|&(s, _)| s <= t);
        if idx == 0 {
            self.units as i64
        } else {
            self.steps[idx - 1].1
        }
    }

    /// First maximal run with no free unit that intersects `[from, to)`, clipped on
    /// the left to `from`. The end may be [`UNBOUNDED`].
    pub fn first_blocked_in(&self, from: Minute, to: Minute) -> Option<(Minute, Minute)> {
        if from >= to {
            return None;
        }
        let mut idx = self.steps.partition_point(|&(s, _)| s <= from);
        let mut level = if idx == 0 {
            self.units as i64
        } else {
            self.steps[idx - 1].1
        };
        let mut seg_start = from;
        loop {
            let seg_end = self.steps.get(idx).map_or(UNBOUNDED, |&(s, _)| s);
            if level <= 0 {
                let mut run_end = seg_end;
                let mut k = idx;
                while k < self.steps.len() && self.steps[k].1 <= 0 {
                    k += 1;
                    run_end = self.steps.get(k).map_or(UNBOUNDED, |&(s, _)| s);
                }
                return Some((seg_start, run_end));
            }
            if seg_end >= to {
                return None;
            }
            seg_start = seg_end;
            level = self.steps[idx].1;
            idx += 1;
        }
    }

    /// Whether at least one unit is free throughout `[from, to)`.
    pub fn is_free(&self, from: Minute, to: Minute) -> bool {
        self.first_blocked_in(from, to).is_none()
    }

    /// Takes one unit over `[start, end)`.
    pub fn reserve(&mut self, start: Minute, end: Minute) -> Result<()> {
        if let Some((at, _)) = self.first_blocked_in(start, end) {
            return Err(Error::Capacity { at });
        }
        self.shift(start, end, -1);
        Ok(())
    }

    /// Returns one unit over `[start, end)`. Over-release is not rejected here;
    /// [`CapacityProfile::check`] reports it.
    pub fn release(&mut self, start: Minute, end: Minute) {
        self.shift(start, end, 1);
    }

    /// Checks `0 <= level <= units` everywhere.
    pub fn check(&self) -> Result<()> {
        match self
            .steps
            .iter()
            .find(|&&(_, l)| l < 0 || l > self.units as i64)
        {
            Some(&(at, level)) => Err(Error::ProfileLevel {
                at,
                level,
                units: self.units,
            }),
            None => Ok(()),
        }
    }

    fn split_at(&mut self, t: Minute) -> usize {
        let idx = self.steps.partition_point(|&(s, _)| s < t);
        if self.steps.get(idx).is_none_or(|&(s, _)| s != t) {
            let level = if idx == 0 {
                self.units as i64
            } else {
                self.steps[idx - 1].1
            };
            self.steps.insert(idx, (t, level));
        }
        idx
    }

    fn shift(&mut self, start: Minute, end: Minute, delta: i64) {
        if start >= end {
            return;
        }
        let lo = self.split_at(start);
        let hi = if end == UNBOUNDED {
            self.steps.len()
        } else {
            self.split_at(end)
        };
        for step in &mut self.steps[lo..hi] {
            step.1 += delta;
        }
        self.compact(lo.saturating_sub(1), (hi + 1).min(self.steps.len()));
    }

    /// Drops redundant breakpoints in `steps[from..to]`.
    fn compact(&mut self, from: usize, to: usize) {
        let mut prev = if from == 0 {
            self.units as i64
        } else {
            self.steps[from - 1].1
        };
        let mut write = from;
        for read in from..to {
            let step = self.steps[read];
            if step.1 != prev {
                self.steps[write] = step;
                write += 1;
                prev = step.1;
            }
        }
        self.steps.drain(write..to);
    }
}
