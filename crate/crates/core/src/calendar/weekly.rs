use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Minute;

use super::{TimeWindowSet, MINUTES_PER_DAY, MINUTES_PER_WEEK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    fn index(self) -> i64 {
        self as i64
    }

    fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_uppercase();
        Self::ALL
            .iter()
            .copied()
            .find(|d| format!("{d:?}").to_ascii_uppercase() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown weekday `{s}`")))
    }
}

/// Recurring weekly operator availability, e.g. `MON..FRI 08:00-18:00`.
///
/// Minute 0 of the plan is taken to be a Monday at 00:00.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklyPattern {
    /// Comma separated days or ranges: `"MON..FRI"`, `"MON,WED,FRI"`, `"MON..WED,SAT"`.
    pub days: String,
    /// `"HH:MM"`.
    pub start: String,
    /// `"HH:MM"`; `"24:00"` closes at midnight.
    pub end: String,
}

impl WeeklyPattern {
    /// Monday to Friday, 08:00 to 18:00.
    pub fn office_hours() -> Self {
        Self {
            days: "MON..FRI".into(),
            start: "08:00".into(),
            end: "18:00".into(),
        }
    }

    pub fn weekdays(&self) -> Result<Vec<Weekday>> {
        let mut out = Vec::new();
        for item in self.days.split(',').filter(|s| !s.trim().is_empty()) {
            match item.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (Weekday::parse(a)?, Weekday::parse(b)?);
                    if a > b {
                        return Err(Error::InvalidConfig(format!("empty day range `{item}`")));
                    }
                    out.extend(Weekday::ALL[a as usize..=b as usize].iter().copied());
                }
                None => out.push(Weekday::parse(item)?),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Expands the pattern into explicit windows intersected with `[from, to)`.
    pub fn expand(&self, from: Minute, to: Minute) -> TimeWindowSet {
        self.try_expand(from, to).expect("valid weekly pattern")
    }

    pub fn try_expand(&self, from: Minute, to: Minute) -> Result<TimeWindowSet> {
        let days = self.weekdays()?;
        let open = parse_clock(&self.start)?;
        let close = parse_clock(&self.end)?;
        if open >= close {
            return Err(Error::InvalidConfig(format!(
                "weekly window {}-{} is empty",
                self.start, self.end
            )));
        }
        let first_week = from.div_euclid(MINUTES_PER_WEEK);
        let last_week = to.div_euclid(MINUTES_PER_WEEK);
        let mut windows = Vec::new();
        for week in first_week..=last_week {
            for day in &days {
                let base = week * MINUTES_PER_WEEK + day.index() * MINUTES_PER_DAY;
                windows.push((base + open, base + close));
            }
        }
        Ok(TimeWindowSet::new(windows).intersect(&TimeWindowSet::new([(from, to)])))
    }
}

fn parse_clock(s: &str) -> Result<Minute> {
    let bad = || Error::InvalidConfig(format!("bad clock time `{s}`, expected HH:MM"));
    let (h, m) = s.trim().split_once(':').ok_or_else(bad)?;
    let h: Minute = h.parse().map_err(|_| bad())?;
    let m: Minute = m.parse().map_err(|_| bad())?;
    if !(0..=24).contains(&h) || !(0..60).contains(&m) || (h == 24 && m != 0) {
        return Err(bad());
    }
    Ok(h * 60 + m)
}
