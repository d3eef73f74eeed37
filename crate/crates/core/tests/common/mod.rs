//! Independent transcription of the published scenario table, converted to
//! day indices with the `time` crate rather than the library's own calendar.

#![allow(dead_code)]

use npisim_core::tokyo::PresetId;
use time::{Date, Month};

const SHORT_TERM: [&str; 4] = [
    "Initial: 0 27 Mar 2020: 1 30 May 2020: 0 05 Jul 2020: 1 15 Sep 2020: 0",
    "Initial: 0 27 Mar 2020: 1 30 May 2020: 0 05 Jul 2020: 1 01 Sep 2020: 0",
    "Initial: 0 27 Mar 2020: 1 30 May 2020: 0 28 Jun 2020: 1 28 Jul 2020: 0",
    "Initial: 0 27 Mar 2020: 1 30 May 2020: 0 03 Jul 2020: 1 01 Sep 2020: 0",
];
const MID_TERM: &str = "Initial: 0 27 Mar 2020: 1 30 May 2020: 0";
const LONG_TERM: &str = "Initial: 0 27 Mar 2020: 1";
const SCHOOL: &str = "Initial: 1 26 May 2020: 0";
const STAY_AT_HOME: [&str; 4] = [
    "Initial: 0 08 Apr 2020: 1 26 May 2020: 0",
    "Initial: 0 08 Apr 2020: 1 26 May 2020: 0 19 Jul 2020: 1 01 Sep 2020 :0",
    "Initial: 0 08 Apr 2020: 1 26 May 2020: 0 28 Jun 2020: 1 28 Jul 2020: 0",
    "Initial: 0 29 Mar 2020: 1 30 May 2020: 0 03 Jun 2020: 1 01 Sep 2020: 0",
];
// not in the table: no focused intervention, new normal from 15 Apr onwards
const FOCUSED: &str = "Initial: 0";
const NEW_NORMAL: &str = "Initial: 0 15 Apr 2020: 1";

pub type Steps = (f64, Vec<(u32, f64)>);

fn month(abbr: &str) -> Month {
    match abbr {
        "Mar" => Month::March,
        "Apr" => Month::April,
        "May" => Month::May,
        "Jun" => Month::June,
        "Jul" => Month::July,
        "Aug" => Month::August,
        "Sep" => Month::September,
        other => panic!("unexpected month {other}"),
    }
}

/// Parses `Initial: v (DD Mon YYYY: v)*`, tolerating the stray space
/// before a colon that appears in one cell.
pub fn parse_cell(cell: &str) -> Steps {
    let cleaned = cell.replace(" :", ": ");
    let tokens: Vec<&str> = cleaned.split_whitespace().collect();
    assert_eq!(tokens[0], "Initial:");
    let initial: f64 = tokens[1].parse().unwrap();
    let origin = Date::from_calendar_date(2020, Month::March, 1).unwrap();
    let steps = tokens[2..]
        .chunks(4)
        .map(|c| {
            let day: u8 = c[0].parse().unwrap();
            let year: i32 = c[2].trim_end_matches(':').parse().unwrap();
            let date = Date::from_calendar_date(year, month(c[1]), day).unwrap();
            ((date - origin).whole_days() as u32, c[3].parse().unwrap())
        })
        .collect();
    (initial, steps)
}

pub fn table2(id: PresetId) -> Vec<(&'static str, Steps)> {
    let col = PresetId::ALL.iter().position(|&p| p == id).unwrap();
    vec![
        ("short_term_consciousness", parse_cell(SHORT_TERM[col])),
        ("mid_term_consciousness", parse_cell(MID_TERM)),
        ("long_term_consciousness", parse_cell(LONG_TERM)),
        ("school_closure_psych", parse_cell(SCHOOL)),
        ("school_closure_commute", parse_cell(SCHOOL)),
        ("stay_at_home", parse_cell(STAY_AT_HOME[col])),
        ("focused_intervention", parse_cell(FOCUSED)),
        ("new_normal", parse_cell(NEW_NORMAL)),
    ]
}

/// Linear scan: value of the last step on or before `day`.
pub fn value_at(initial: f64, steps: &[(u32, f64)], day: u32) -> f64 {
    let mut v = initial;
    for &(d, x) in steps {
        if d <= day {
            v = x;
        }
    }
    v
}
