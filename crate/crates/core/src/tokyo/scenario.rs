use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::TokyoError;
use crate::engine::Schedule;

pub(crate) fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

/// First simulated day.
pub fn default_start() -> NaiveDate {
    ymd(2020, 3, 1)
}

/// 01 Mar 2020 through 30 Sep 2020.
pub const DEFAULT_HORIZON: u32 = 213;

/// Whole days from `start` to `date`.
pub fn date_to_day(date: NaiveDate, start: NaiveDate) -> Result<u32, TokyoError> {
    let days = (date - start).num_days();
    u32::try_from(days).map_err(|_| TokyoError::DateBeforeStart { date, start })
}

pub const SCHEDULE_NAMES: [&str; 8] = [
    "short_term_consciousness",
    "mid_term_consciousness",
    "long_term_consciousness",
    "school_closure_psych",
    "school_closure_commute",
    "stay_at_home",
    "focused_intervention",
    "new_normal",
];

/// A named set of binary intervention schedules, day-indexed from `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub start: NaiveDate,
    pub short_term_consciousness: Schedule,
    pub mid_term_consciousness: Schedule,
    pub long_term_consciousness: Schedule,
    pub school_closure_psych: Schedule,
    pub school_closure_commute: Schedule,
    pub stay_at_home: Schedule,
    pub focused_intervention: Schedule,
    pub new_normal: Schedule,
}

impl ScenarioSpec {
    /// All inputs off.
    pub fn empty(name: impl Into<String>, start: NaiveDate) -> Self {
        let off = Schedule::constant(0.0);
        ScenarioSpec {
            name: name.into(),
            start,
            short_term_consciousness: off.clone(),
            mid_term_consciousness: off.clone(),
            long_term_consciousness: off.clone(),
            school_closure_psych: off.clone(),
            school_closure_commute: off.clone(),
            stay_at_home: off.clone(),
            focused_intervention: off.clone(),
            new_normal: off,
        }
    }

    pub fn schedules(&self) -> [(&'static str, &Schedule); 8] {
        [
            (SCHEDULE_NAMES[0], &self.short_term_consciousness),
            (SCHEDULE_NAMES[1], &self.mid_term_consciousness),
            (SCHEDULE_NAMES[2], &self.long_term_consciousness),
            (SCHEDULE_NAMES[3], &self.school_closure_psych),
            (SCHEDULE_NAMES[4], &self.school_closure_commute),
            (SCHEDULE_NAMES[5], &self.stay_at_home),
            (SCHEDULE_NAMES[6], &self.focused_intervention),
            (SCHEDULE_NAMES[7], &self.new_normal),
        ]
    }

    pub fn schedule(&self, name: &str) -> Option<&Schedule> {
        self.schedules()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
    }

    pub fn schedule_mut(&mut self, name: &str) -> Option<&mut Schedule> {
        Some(match name {
            "short_term_consciousness" => &mut self.short_term_consciousness,
            "mid_term_consciousness" => &mut self.mid_term_consciousness,
            "long_term_consciousness" => &mut self.long_term_consciousness,
            "school_closure_psych" => &mut self.school_closure_psych,
            "school_closure_commute" => &mut self.school_closure_commute,
            "stay_at_home" => &mut self.stay_at_home,
            "focused_intervention" => &mut self.focused_intervention,
            "new_normal" => &mut self.new_normal,
            _ => return None,
        })
    }

    /// Values must be 0 or 1 and every breakpoint must fall inside the run.
    pub fn validate(&self, horizon: u32) -> Result<(), TokyoError> {
        for (name, s) in self.schedules() {
            if let Some(v) = s.values().find(|&v| v != 0.0 && v != 1.0) {
                return Err(TokyoError::NonBinary {
                    schedule: name.to_string(),
                    value: v,
                });
            }
            if let Some(&(day, _)) = s.breakpoints().iter().find(|(d, _)| *d > horizon) {
                return Err(TokyoError::OutsideWindow {
                    schedule: name.to_string(),
                    day,
                    horizon,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetId {
    Realistic,
    SecondEmergency,
    PreEmptiveShorter,
    Exhaustive,
}

impl PresetId {
    pub const ALL: [PresetId; 4] = [
        PresetId::Realistic,
        PresetId::SecondEmergency,
        PresetId::PreEmptiveShorter,
        PresetId::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Realistic => "realistic",
            PresetId::SecondEmergency => "second_emergency",
            PresetId::PreEmptiveShorter => "pre_emptive_shorter",
            PresetId::Exhaustive => "exhaustive",
        }
    }

    pub fn valid_names() -> String {
        PresetId::ALL.map(PresetId::name).join(", ")
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = TokyoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| TokyoError::UnknownPreset(s.to_string()))
    }
}

/// Day on which new-normal lifestyle switches on (irreversibly) in presets.
pub fn new_normal_onset() -> NaiveDate {
    ymd(2020, 4, 15)
}

fn dated(start: NaiveDate, initial: f64, changes: &[((u32, u32), f64)]) -> Schedule {
    let bps = changes
        .iter()
        .map(|&((m, d), v)| {
            (
                date_to_day(ymd(2020, m, d), start).expect("preset date after start"),
                v,
            )
        })
        .collect();
    Schedule::new(initial, bps).expect("preset breakpoints increasing")
}

pub fn preset(id: PresetId) -> ScenarioSpec {
    let start = default_start();
    let short_term: &[((u32, u32), f64)] = match id {
        PresetId::Realistic => &[
            ((3, 27), 1.0),
            ((5, 30), 0.0),
            ((7, 5), 1.0),
            ((9, 15), 0.0),
        ],
        PresetId::SecondEmergency => {
            &[((3, 27), 1.0), ((5, 30), 0.0), ((7, 5), 1.0), ((9, 1), 0.0)]
        }
        PresetId::PreEmptiveShorter => &[
            ((3, 27), 1.0),
            ((5, 30), 0.0),
            ((6, 28), 1.0),
            ((7, 28), 0.0),
        ],
        PresetId::Exhaustive => &[((3, 27), 1.0), ((5, 30), 0.0), ((7, 3), 1.0), ((9, 1), 0.0)],
    };
    let stay_at_home: &[((u32, u32), f64)] = match id {
        PresetId::Realistic => &[((4, 8), 1.0), ((5, 26), 0.0)],
        PresetId::SecondEmergency => {
            &[((4, 8), 1.0), ((5, 26), 0.0), ((7, 19), 1.0), ((9, 1), 0.0)]
        }
        PresetId::PreEmptiveShorter => &[
            ((4, 8), 1.0),
            ((5, 26), 0.0),
            ((6, 28), 1.0),
            ((7, 28), 0.0),
        ],
        PresetId::Exhaustive => &[((3, 29), 1.0), ((5, 30), 0.0), ((6, 3), 1.0), ((9, 1), 0.0)],
    };
    let school = dated(start, 1.0, &[((5, 26), 0.0)]);
    ScenarioSpec {
        name: id.name().to_string(),
        start,
        short_term_consciousness: dated(start, 0.0, short_term),
        mid_term_consciousness: dated(start, 0.0, &[((3, 27), 1.0), ((5, 30), 0.0)]),
        long_term_consciousness: dated(start, 0.0, &[((3, 27), 1.0)]),
        school_closure_psych: school.clone(),
        school_closure_commute: school,
        stay_at_home: dated(start, 0.0, stay_at_home),
        focused_intervention: Schedule::constant(0.0),
        new_normal: Schedule::new(
            0.0,
            vec![(
                date_to_day(new_normal_onset(), start).expect("onset after start"),
                1.0,
            )],
        )
        .expect("single breakpoint"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn date_examples() {
        let s = default_start();
        assert_eq!(date_to_day(s, s).unwrap(), 0);
        assert_eq!(date_to_day(ymd(2020, 4, 8), s).unwrap(), 38);
        assert_eq!(date_to_day(ymd(2020, 9, 1), s).unwrap(), 184);
        assert_eq!(date_to_day(ymd(2020, 9, 30), s).unwrap(), DEFAULT_HORIZON);
        assert!(matches!(
            date_to_day(ymd(2020, 2, 29), s),
            Err(TokyoError::DateBeforeStart { .. })
        ));
    }

    #[test]
    fn preset_names_round_trip() {
        for id in PresetId::ALL {
            assert_eq!(id.name().parse::<PresetId>().unwrap(), id);
            assert_eq!(preset(id).name, id.name());
        }
        assert!(matches!(
            "bogus".parse::<PresetId>(),
            Err(TokyoError::UnknownPreset(_))
        ));
    }

    #[test]
    fn presets_validate_on_default_window() {
        for id in PresetId::ALL {
            preset(id).validate(DEFAULT_HORIZON).unwrap();
        }
        // realistic short-term consciousness ends on day 198
        assert!(preset(PresetId::Realistic).validate(150).is_err());
    }

    #[test]
    fn non_binary_value_rejected() {
        let mut s = preset(PresetId::Realistic);
        *s.schedule_mut("stay_at_home").unwrap() = Schedule::new(0.0, vec![(10, 2.0)]).unwrap();
        assert!(matches!(
            s.validate(DEFAULT_HORIZON),
            Err(TokyoError::NonBinary { ref schedule, value }) if schedule == "stay_at_home" && value == 2.0
        ));
    }

    #[test]
    fn lookup_by_name() {
        let s = preset(PresetId::Exhaustive);
        for name in SCHEDULE_NAMES {
            assert!(s.schedule(name).is_some());
        }
        assert!(s.schedule("temperature_effect").is_none());
    }
}
