use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("breakpoints must be strictly increasing (day {prev} followed by day {next})")]
    NotIncreasing { prev: u32, next: u32 },
    #[error("non-finite schedule value at day {0}")]
    NonFinite(u32),
}

/// Piecewise-constant input: `default` until the first breakpoint, then the
/// value of the most recent breakpoint. A breakpoint takes effect on its own
/// day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    default: f64,
    breakpoints: Vec<(u32, f64)>,
}

impl Schedule {
    pub fn new(default: f64, breakpoints: Vec<(u32, f64)>) -> Result<Self, ScheduleError> {
        if !default.is_finite() {
            return Err(ScheduleError::NonFinite(0));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ScheduleError::NotIncreasing {
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        if let Some(&(day, _)) = breakpoints.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ScheduleError::NonFinite(day));
        }
        Ok(Schedule {
            default,
            breakpoints,
        })
    }

    pub fn constant(value: f64) -> Self {
        Schedule {
            default: value,
            breakpoints: Vec::new(),
        }
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn breakpoints(&self) -> &[(u32, f64)] {
        &self.breakpoints
    }

    /// Every distinct value the schedule can take.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.default).chain(self.breakpoints.iter().map(|&(_, v)| v))
    }

    pub fn eval(&self, day: f64) -> f64 {
        eval_schedule(self, day)
    }
}

pub fn eval_schedule(s: &Schedule, day: f64) -> f64 {
    // number of breakpoints with day_index <= day
    let n = s.breakpoints.partition_point(|&(d, _)| f64::from(d) <= day);
    match n {
        0 => s.default,
        n => s.breakpoints[n - 1].1,
    }
}
