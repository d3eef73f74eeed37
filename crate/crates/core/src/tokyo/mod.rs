//! Tokyo COVID-19 model: disease transmission, people flow/behaviour and
//! restaurant demand, plus the four intervention presets.

mod build;
pub mod multipliers;
pub mod params;
pub mod scenario;

use chrono::NaiveDate;
use thiserror::Error;

use crate::engine::{DefineError, ScheduleError, ValidationReport};

pub use build::{build_model, EPIDEMIOLOGICAL_STOCKS};
pub use multipliers::{
    behavior_risk_multiplier, effective_protection, ewom_multiplier, infection_flow,
    people_flow_multiplier, visits_multiplier,
};
pub use params::{
    CarrierWeights, DatedSchedule, DiseaseParams, EwomCoefficients, FlowCoefficients, InitialCases,
    MobilityBehaviorParams, ModelParams, RestaurantParams, VisitCoefficients,
};
pub use scenario::{
    date_to_day, default_start, new_normal_onset, preset, PresetId, ScenarioSpec, DEFAULT_HORIZON,
    SCHEDULE_NAMES,
};

#[derive(Debug, Error)]
pub enum TokyoError {
    #[error("{date} is before the simulation start {start}")]
    DateBeforeStart { date: NaiveDate, start: NaiveDate },
    #[error("unknown preset `{0}` (valid presets: realistic, second_emergency, pre_emptive_shorter, exhaustive)")]
    UnknownPreset(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("schedule `{schedule}` has non-binary value {value}")]
    NonBinary { schedule: String, value: f64 },
    #[error("schedule `{schedule}` changes on day {day}, outside the {horizon}-day window")]
    OutsideWindow {
        schedule: String,
        day: u32,
        horizon: u32,
    },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Define(#[from] DefineError),
    #[error("model failed validation: {0}")]
    Invalid(ValidationReport),
}
