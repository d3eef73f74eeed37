use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    RelativeToBaseline {
        baseline: f64,
    },
    /// Per-record divisor taken from the same date one year earlier.
    RelativeToPriorYear {
        references: Vec<f64>,
    },
}

/// Date-indexed real-world metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSeries {
    pub metric: String,
    pub records: Vec<(NaiveDate, f64)>,
    pub normalization: Normalization,
}

impl ObservedSeries {
    pub fn new(
        metric: impl Into<String>,
        records: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, MetricsError> {
        if let Some(w) = records.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(MetricsError::NotIncreasing(w[1].0));
        }
        if let Some(&(date, _)) = records.iter().find(|(_, v)| !v.is_finite()) {
            return Err(MetricsError::NonFinite(date));
        }
        Ok(ObservedSeries {
            metric: metric.into(),
            records,
            normalization: Normalization::Raw,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.records.iter().map(|r| r.0)
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.1).collect()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.records
            .binary_search_by_key(&date, |r| r.0)
            .ok()
            .map(|i| self.records[i].1)
    }

    /// Undoes [`normalize`], returning the raw series.
    pub fn denormalize(&self) -> ObservedSeries {
        let records = match &self.normalization {
            Normalization::Raw => self.records.clone(),
            Normalization::RelativeToBaseline { baseline } => self
                .records
                .iter()
                .map(|&(d, v)| (d, v * baseline))
                .collect(),
            Normalization::RelativeToPriorYear { references } => self
                .records
                .iter()
                .zip(references)
                .map(|(&(d, v), r)| (d, v * r))
                .collect(),
        };
        ObservedSeries {
            metric: self.metric.clone(),
            records,
            normalization: Normalization::Raw,
        }
    }
}

/// Reads `date,value` CSV. Lines starting with `#` are ignored.
pub fn ingest_observed(metric: &str, text: &str) -> Result<ObservedSeries, MetricsError> {
    ingest_column(metric, text, "value")
}

/// Reads the `date` column and one named value column from any CSV with a
/// header row. Line numbers in errors are 1-based file lines.
pub fn ingest_column(
    metric: &str,
    text: &str,
    column: &str,
) -> Result<ObservedSeries, MetricsError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| MetricsError::Csv(e.to_string()))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MetricsError::MissingColumn(name.to_string()))
    };
    let date_col = find("date")?;
    let value_col = find(column)?;

    let mut records: Vec<(NaiveDate, f64)> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| MetricsError::Csv(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let malformed = |reason: String| MetricsError::Malformed { line, reason };
        let date_text = row
            .get(date_col)
            .ok_or_else(|| malformed("missing date".into()))?;
        let value_text = row
            .get(value_col)
            .ok_or_else(|| malformed(format!("missing {column}")))?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
            .map_err(|_| malformed(format!("bad date `{date_text}`")))?;
        let value: f64 = value_text
            .parse()
            .map_err(|_| malformed(format!("bad value `{value_text}`")))?;
        if !value.is_finite() {
            return Err(malformed(format!("non-finite value `{value_text}`")));
        }
        if let Some(&(prev, _)) = records.last() {
            if date == prev {
                return Err(MetricsError::DuplicateDate { line, date });
            }
            if date < prev {
                return Err(MetricsError::OutOfOrder { line, date });
            }
        }
        records.push((date, value));
    }
    ObservedSeries::new(metric, records)
}

pub enum Reference<'a> {
    Baseline(f64),
    PriorYear(&'a ObservedSeries),
}

fn year_before(date: NaiveDate) -> Option<NaiveDate> {
    date.with_year(date.year() - 1)
}

pub fn normalize(
    s: &ObservedSeries,
    reference: Reference<'_>,
) -> Result<ObservedSeries, MetricsError> {
    if s.normalization != Normalization::Raw {
        return Err(MetricsError::AlreadyNormalized);
    }
    match reference {
        Reference::Baseline(baseline) => {
            if baseline == 0.0 || !baseline.is_finite() {
                return Err(MetricsError::ZeroReference(None));
            }
            Ok(ObservedSeries {
                metric: s.metric.clone(),
                records: s.records.iter().map(|&(d, v)| (d, v / baseline)).collect(),
                normalization: Normalization::RelativeToBaseline { baseline },
            })
        }
        Reference::PriorYear(prior) => {
            let mut records = Vec::with_capacity(s.len());
            let mut references = Vec::with_capacity(s.len());
            for &(date, v) in &s.records {
                let r = year_before(date)
                    .and_then(|d| prior.get(d))
                    .ok_or(MetricsError::NoPriorYear(date))?;
                if r == 0.0 {
                    return Err(MetricsError::ZeroReference(Some(date)));
                }
                records.push((date, v / r));
                references.push(r);
            }
            Ok(ObservedSeries {
                metric: s.metric.clone(),
                records,
                normalization: Normalization::RelativeToPriorYear { references },
            })
        }
    }
}
