//! Wire types shared by the CLI and the HTTP service: the scenario file,
//! simulation request/response, CSV output and scenario summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{CompiledModel, EngineError, RunConfig, Schedule};
use crate::tokyo::{
    build_model, date_to_day, preset, ModelParams, PresetId, ScenarioSpec, TokyoError,
    DEFAULT_HORIZON, SCHEDULE_NAMES,
};
use crate::ENGINE_VERSION;

/// Scenario document exchanged as JSON.
///
/// Each schedule is a list of `[date, value]` pairs. A pair dated on
/// `start_date` sets the initial value; schedules start at 0 otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub start_date: NaiveDate,
    pub schedules: BTreeMap<String, Vec<(NaiveDate, f64)>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub param_overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Error)]
pub enum ApiError {
    /// Request is well-formed but violates a model or scenario invariant.
    #[error("{0}")]
    Invalid(String),
    #[error("engine failure: {0}")]
    Engine(#[from] EngineError),
}

impl From<TokyoError> for ApiError {
    fn from(e: TokyoError) -> Self {
        ApiError::Invalid(e.to_string())
    }
}

impl ScenarioFile {
    pub fn from_spec(spec: &ScenarioSpec, param_overrides: BTreeMap<String, f64>) -> Self {
        let schedules = spec
            .schedules()
            .into_iter()
            .map(|(name, s)| {
                let mut pairs = vec![(spec.start, s.default_value())];
                pairs.extend(
                    s.breakpoints()
                        .iter()
                        .map(|&(day, v)| (spec.start + chrono::Days::new(u64::from(day)), v)),
                );
                (name.to_string(), pairs)
            })
            .collect();
        ScenarioFile {
            name: spec.name.clone(),
            start_date: spec.start,
            schedules,
            param_overrides,
        }
    }

    pub fn to_spec(&self) -> Result<ScenarioSpec, ApiError> {
        let mut spec = ScenarioSpec::empty(self.name.clone(), self.start_date);
        if let Some(unknown) = self
            .schedules
            .keys()
            .find(|k| !SCHEDULE_NAMES.contains(&k.as_str()))
        {
            return Err(ApiError::Invalid(format!(
                "schedules.{unknown}: unknown schedule (expected one of {})",
                SCHEDULE_NAMES.join(", ")
            )));
        }
        for name in SCHEDULE_NAMES {
            let pairs = self
                .schedules
                .get(name)
                .ok_or_else(|| ApiError::Invalid(format!("schedules.{name}: missing")))?;
            let mut default = 0.0;
            let mut bps = Vec::with_capacity(pairs.len());
            for &(date, value) in pairs {
                let day = date_to_day(date, self.start_date)
                    .map_err(|e| ApiError::Invalid(format!("schedules.{name}: {e}")))?;
                if day == 0 && bps.is_empty() {
                    default = value;
                } else {
                    bps.push((day, value));
                }
            }
            let schedule = Schedule::new(default, bps)
                .map_err(|e| ApiError::Invalid(format!("schedules.{name}: {e}")))?;
            *spec.schedule_mut(name).expect("known schedule name") = schedule;
        }
        Ok(spec)
    }
}

/// All presets as scenario files, in canonical order.
pub fn presets() -> Vec<ScenarioFile> {
    PresetId::ALL
        .iter()
        .map(|&id| ScenarioFile::from_spec(&preset(id), BTreeMap::new()))
        .collect()
}

/// Exactly one of `preset` or `scenario` must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioFile>,
    /// Applied after the scenario's own overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub param_overrides: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl SimRequest {
    pub fn preset(name: &str) -> Self {
        SimRequest {
            preset: Some(name.to_string()),
            ..SimRequest::default()
        }
    }

    pub fn scenario(file: ScenarioFile) -> Self {
        SimRequest {
            scenario: Some(file),
            ..SimRequest::default()
        }
    }

    /// Resolves the scenario and merged overrides.
    pub fn resolve(&self) -> Result<(ScenarioSpec, BTreeMap<String, f64>), ApiError> {
        let (spec, mut overrides) = match (&self.preset, &self.scenario) {
            (Some(name), None) => {
                let id: PresetId = name.parse()?;
                (preset(id), BTreeMap::new())
            }
            (None, Some(file)) => (file.to_spec()?, file.param_overrides.clone()),
            _ => {
                return Err(ApiError::Invalid(
                    "exactly one of `preset` or `scenario` must be given".into(),
                ))
            }
        };
        overrides.extend(self.param_overrides.iter().map(|(k, v)| (k.clone(), *v)));
        Ok((spec, overrides))
    }

    pub fn run_config(&self, start: NaiveDate) -> RunConfig {
        RunConfig::new(start, self.horizon.unwrap_or(DEFAULT_HORIZON))
            .with_dt(self.dt.unwrap_or(1.0))
    }
}

/// Headline series listed first in responses and CSV output.
pub const HEADLINE_SERIES: [&str; 5] = [
    "daily_confirmed",
    "cumulative_confirmed",
    "people_flow",
    "visits_normalized",
    "ewom_mass",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResponse {
    pub dates: Vec<NaiveDate>,
    pub series: IndexMap<String, Vec<f64>>,
    pub scenario: ScenarioFile,
    pub engine_version: String,
}

pub fn simulate(req: &SimRequest) -> Result<SimResponse, ApiError> {
    let (spec, overrides) = req.resolve()?;
    let cfg = req.run_config(spec.start);
    cfg.steps_per_day()
        .map_err(|e| ApiError::Invalid(e.to_string()))?;
    spec.validate(cfg.horizon)?;
    let params = ModelParams::default().with_overrides(&overrides)?;
    let model = build_model(&params, &spec)?;
    let result = CompiledModel::new(&model)?.run(&cfg)?;

    let mut series = IndexMap::new();
    for name in HEADLINE_SERIES {
        let source = if name == "cumulative_confirmed" {
            "CumulativeConfirmed"
        } else {
            name
        };
        let values = result.series(source).expect("model emits headline series");
        series.insert(name.to_string(), values.to_vec());
    }
    for (name, values) in result.series {
        series.entry(name).or_insert(values);
    }

    Ok(SimResponse {
        dates: result.dates,
        series,
        scenario: ScenarioFile::from_spec(&spec, overrides),
        engine_version: ENGINE_VERSION.to_string(),
    })
}

impl SimResponse {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    /// `day,date,<series...>`; values use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("day,date");
        for name in self.series.keys() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, date) in self.dates.iter().enumerate() {
            let _ = write!(out, "{i},{date}");
            for values in self.series.values() {
                let _ = write!(out, ",{}", values[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> ScenarioSummary {
        let get = |n: &str| self.series(n).expect("headline series present");
        let daily = get("daily_confirmed");
        let ewom = get("ewom_mass");
        ScenarioSummary {
            name: self.scenario.name.clone(),
            cumulative_confirmed: *get("cumulative_confirmed").last().unwrap_or(&0.0),
            peak_daily_confirmed: daily.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            cumulative_visits: get("visits_normalized").iter().sum(),
            mean_ewom_mass: ewom.iter().sum::<f64>() / ewom.len() as f64,
        }
    }
}

/// Per-scenario figures used to compare intervention patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub cumulative_confirmed: f64,
    pub peak_daily_confirmed: f64,
    /// Sum of daily visits relative to the no-intervention baseline.
    pub cumulative_visits: f64,
    pub mean_ewom_mass: f64,
}
