use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{align, rmse};
use super::{MetricsError, ObservedSeries};
use crate::engine::{CompiledModel, RunConfig};
use crate::tokyo::{build_model, ModelParams, ScenarioSpec};

/// Simulated series the calibration loss is computed on.
pub const FIT_SERIES: &str = "daily_confirmed";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Grid { min, max, step }
    }

    /// `min + i*step` up to `max`, rounded to 12 decimal places so that
    /// decimal grids hit their nominal values exactly.
    pub fn points(&self) -> Result<Vec<f64>, MetricsError> {
        let bad = |why: &str| {
            MetricsError::BadGrid(format!(
                "{why} (min {}, max {}, step {})",
                self.min, self.max, self.step
            ))
        };
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(bad("non-finite bound"));
        }
        if self.max < self.min {
            return Err(bad("empty grid"));
        }
        if self.min <= 0.0 {
            return Err(bad("transmission scale must be positive"));
        }
        if self.step <= 0.0 {
            if self.max == self.min {
                return Ok(vec![self.min]);
            }
            return Err(bad("step must be positive"));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(bad("too many grid points"));
        }
        Ok((0..=n)
            .map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub best_scale: f64,
    pub best_loss: f64,
    pub grid: Vec<f64>,
    /// RMSE of daily confirmed positives at each grid point.
    pub losses: Vec<f64>,
    pub points_compared: usize,
}

/// Grid search over `disease.transmission_scale`.
pub fn fit_transmission_scale(
    params: &ModelParams,
    scenario: &ScenarioSpec,
    cfg: &RunConfig,
    observed: &ObservedSeries,
    grid: &Grid,
) -> Result<FitResult, MetricsError> {
    let points = grid.points()?;
    let dates: Vec<_> = (0..=u64::from(cfg.horizon))
        .filter_map(|d| cfg.start.checked_add_days(chrono::Days::new(d)))
        .collect();
    let overlap = align(observed, &dates, &vec![0.0; dates.len()]).dates.len();
    if overlap == 0 {
        return Err(MetricsError::NoOverlap);
    }

    let losses = points
        .par_iter()
        .map(|&scale| {
            let mut p = params.clone();
            p.disease.transmission_scale = scale;
            let model =
                build_model(&p, scenario).map_err(|e| MetricsError::Model(e.to_string()))?;
            let result = CompiledModel::new(&model)
                .and_then(|m| m.run(cfg))
                .map_err(|e| MetricsError::Model(e.to_string()))?;
            let sim = result
                .series(FIT_SERIES)
                .expect("model emits daily_confirmed");
            let al = align(observed, &result.dates, sim);
            rmse(&al.simulated, &al.observed)
        })
        .collect::<Result<Vec<f64>, _>>()?;

    // first minimum wins: ties go to the smaller scale
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l < losses[best] {
            best = i;
        }
    }
    Ok(FitResult {
        best_scale: points[best],
        best_loss: losses[best],
        grid: points,
        losses,
        points_compared: overlap,
    })
}
