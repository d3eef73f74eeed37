use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{MetricsError, ObservedSeries};

/// Sample Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(MetricsError::TooShort(a.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::TooShort(0));
    }
    let sse: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sse / a.len() as f64).sqrt())
}

/// Observed and simulated values on the dates both cover.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub dates: Vec<NaiveDate>,
    pub observed: Vec<f64>,
    pub simulated: Vec<f64>,
}

/// Strict date intersection; no interpolation. `sim_dates` must be sorted.
pub fn align(observed: &ObservedSeries, sim_dates: &[NaiveDate], sim_values: &[f64]) -> Aligned {
    let mut out = Aligned {
        dates: Vec::new(),
        observed: Vec::new(),
        simulated: Vec::new(),
    };
    for &(date, value) in &observed.records {
        if let Ok(i) = sim_dates.binary_search(&date) {
            out.dates.push(date);
            out.observed.push(value);
            out.simulated.push(sim_values[i]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub points: usize,
    pub rmse: f64,
    /// `None` when fewer than 3 points overlap or either side is constant.
    pub pearson: Option<f64>,
    /// Simulated minus observed.
    pub residuals: Vec<(NaiveDate, f64)>,
}

pub fn compare(
    observed: &ObservedSeries,
    sim_dates: &[NaiveDate],
    sim_values: &[f64],
) -> Result<ComparisonReport, MetricsError> {
    let al = align(observed, sim_dates, sim_values);
    let (Some(&start), Some(&end)) = (al.dates.first(), al.dates.last()) else {
        return Err(MetricsError::NoOverlap);
    };
    let rmse = rmse(&al.simulated, &al.observed)?;
    let pearson = pearson(&al.simulated, &al.observed).ok();
    let residuals = al
        .dates
        .iter()
        .zip(al.simulated.iter().zip(&al.observed))
        .map(|(&d, (s, o))| (d, s - o))
        .collect();
    Ok(ComparisonReport {
        metric: observed.metric.clone(),
        start,
        end,
        points: al.dates.len(),
        rmse,
        pearson,
        residuals,
    })
}
