use serde::{Deserialize, Serialize};

use crate::Minute;

/// End marker for a window that never closes.
pub const UNBOUNDED: Minute = Minute::MAX;

/// Sorted, disjoint, non-adjacent set of half-open windows.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(Minute, Minute)>", into = "Vec<(Minute, Minute)>")]
pub struct TimeWindowSet {
    windows: Vec<(Minute, Minute)>,
}

impl TimeWindowSet {
    /// Builds a normalized set from arbitrary windows: empty ones are dropped,
    /// overlapping or touching ones merged.
    pub fn new(windows: impl IntoIterator<Item = (Minute, Minute)>) -> Self {
        let mut raw: Vec<_> = windows.into_iter().filter(|&(a, b)| a < b).collect();
        raw.sort_unstable();
        let mut merged: Vec<(Minute, Minute)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { windows: merged }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole time line.
    pub fn always() -> Self {
        Self {
            windows: vec![(Minute::MIN, UNBOUNDED)],
        }
    }

    /// `[start, +∞)`.
    pub fn from_start(start: Minute) -> Self {
        Self::new([(start, UNBOUNDED)])
    }

    pub fn windows(&self) -> &[(Minute, Minute)] {
        &self.windows
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn contains(&self, t: Minute) -> bool {
        let idx = self.windows.partition_point(|&(_, b)| b <= t);
        self.windows.get(idx).is_some_and(|&(a, _)| a <= t)
    }

    /// Smallest instant `>= t` inside the set.
    pub fn next_at_or_after(&self, t: Minute) -> Option<Minute> {
        let idx = self.windows.partition_point(|&(_, b)| b <= t);
        self.windows.get(idx).map(|&(a, _)| a.max(t))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.windows.len() && j < other.windows.len() {
            let (a1, b1) = self.windows[i];
            let (a2, b2) = other.windows[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces of two normalized sets are already disjoint and sorted; adjacency
        // can only come from touching windows, which normalization merges.
        Self::new(out)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.windows.iter().chain(&other.windows).copied())
    }

    /// Total covered minutes, `None` when unbounded.
    pub fn measure(&self) -> Option<Minute> {
        self.windows.iter().try_fold(0, |acc: Minute, &(a, b)| {
            if b == UNBOUNDED || a == Minute::MIN {
                None
            } else {
                Some(acc + (b - a))
            }
        })
    }
}

impl From<Vec<(Minute, Minute)>> for TimeWindowSet {
    fn from(v: Vec<(Minute, Minute)>) -> Self {
        Self::new(v)
    }
}

impl From<TimeWindowSet> for Vec<(Minute, Minute)> {
    fn from(s: TimeWindowSet) -> Self {
        s.windows
    }
}
