//! Heating-season calendar on a fixed non-leap year.

use serde::{Deserialize, Serialize};

use crate::units::SECONDS_PER_DAY;

const DAYS_BEFORE_MONTH: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];
const DAYS_IN_MONTH: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Month and day, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub fn new(month: u32, day: u32) -> Option<Self> {
        if (1..=12).contains(&month) && day >= 1 && day <= DAYS_IN_MONTH[month as usize - 1] {
            Some(MonthDay { month, day })
        } else {
            None
        }
    }

    /// 0-based day of the non-leap year.
    pub fn day_of_year(self) -> u32 {
        DAYS_BEFORE_MONTH[self.month as usize - 1] + self.day - 1
    }
}

impl std::fmt::Display for MonthDay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

impl std::str::FromStr for MonthDay {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (m, d) = s.split_once('-').ok_or_else(|| format!("expected MM-DD, got `{s}`"))?;
        let m = m.parse().map_err(|_| format!("bad month in `{s}`"))?;
        let d = d.parse().map_err(|_| format!("bad day in `{s}`"))?;
        MonthDay::new(m, d).ok_or_else(|| format!("no such date `{s}`"))
    }
}

impl Serialize for MonthDay {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthDay {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Space heating runs from 1 January through `last_day` and again from
/// `first_day` through 31 December, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingCalendar {
    pub last_day: MonthDay,
    pub first_day: MonthDay,
}

impl Default for HeatingCalendar {
    fn default() -> Self {
        HeatingCalendar {
            last_day: MonthDay { month: 5, day: 10 },
            first_day: MonthDay { month: 10, day: 1 },
        }
    }
}

impl HeatingCalendar {
    pub fn contains_day(&self, day_of_year: u32) -> bool {
        day_of_year <= self.last_day.day_of_year() || day_of_year >= self.first_day.day_of_year()
    }

    pub fn season_days(&self) -> u32 {
        (0..365).filter(|&d| self.contains_day(d)).count() as u32
    }
}

/// Whether `t` (seconds from 1 January 00:00) falls in the heating season.
pub fn heating_season(t: f64, calendar: &HeatingCalendar) -> bool {
    let day = (t / SECONDS_PER_DAY).floor().rem_euclid(365.0) as u32;
    calendar.contains_day(day)
}
