use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use npisim_core::api::{self, ScenarioFile, ScenarioSummary, SimRequest, SimResponse};
use npisim_core::metrics::{fit_transmission_scale, ingest_column, FitResult, Grid};
use npisim_core::tokyo::{ModelParams, DEFAULT_HORIZON};
use npisim_core::RunConfig;

use crate::svg;

/// A preset name or a path to a scenario JSON file.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Preset(String),
    File(PathBuf),
}

impl Source {
    /// Existing files and `.json` paths are scenario files; anything else is
    /// taken as a preset name.
    pub fn parse(arg: &str) -> Source {
        let path = Path::new(arg);
        if path.is_file() || path.extension().is_some_and(|e| e == "json") {
            Source::File(path.to_path_buf())
        } else {
            Source::Preset(arg.to_string())
        }
    }

    pub fn request(&self) -> Result<SimRequest> {
        Ok(match self {
            Source::Preset(name) => SimRequest::preset(name),
            Source::File(path) => SimRequest::scenario(read_scenario(path)?),
        })
    }
}

pub fn read_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .with_context(|| format!("parsing scenario {}", path.display()))
}

/// Parses `path=value` parameter overrides.
pub fn parse_override(arg: &str) -> Result<(String, f64), String> {
    let (key, value) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected PATH=VALUE, got `{arg}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    Ok((key.trim().to_string(), value))
}

/// Parses `min:max:step` and rejects grids with no points.
pub fn parse_grid(arg: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = arg.split(':').collect();
    let [min, max, step] = parts.as_slice() else {
        return Err(format!("expected MIN:MAX:STEP, got `{arg}`"));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let grid = Grid::new(num(min)?, num(max)?, num(step)?);
    grid.points().map_err(|e| e.to_string())?;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn render(resp: &SimResponse, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Csv => resp.to_csv(),
        OutputFormat::Json => serde_json::to_string_pretty(resp)? + "\n",
    })
}

/// `-` or no path means standard output.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => print!("{text}"),
        Some(p) if p == Path::new("-") => print!("{text}"),
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
    }
    Ok(())
}

pub fn chart(resp: &SimResponse) -> String {
    let daily = resp.series("daily_confirmed").unwrap_or_default();
    svg::line_chart(
        &format!("{}: daily confirmed positives", resp.scenario.name),
        &resp.dates,
        &[("daily_confirmed", daily)],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Metric {
    All,
    Confirmed,
    Visits,
    Ewom,
}

impl Metric {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Metric::All => &[
                "cumulative_confirmed",
                "peak_daily_confirmed",
                "cumulative_visits",
                "mean_ewom_mass",
            ],
            Metric::Confirmed => &["cumulative_confirmed", "peak_daily_confirmed"],
            Metric::Visits => &["cumulative_visits"],
            Metric::Ewom => &["mean_ewom_mass"],
        }
    }
}

fn column(s: &ScenarioSummary, name: &str) -> f64 {
    match name {
        "cumulative_confirmed" => s.cumulative_confirmed,
        "peak_daily_confirmed" => s.peak_daily_confirmed,
        "cumulative_visits" => s.cumulative_visits,
        "mean_ewom_mass" => s.mean_ewom_mass,
        _ => unreachable!("unknown column {name}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

pub fn compare_table(rows: &[ScenarioSummary], metric: Metric, format: TableFormat) -> String {
    let cols = metric.columns();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let _ = writeln!(out, "scenario,{}", cols.join(","));
            for r in rows {
                let values: Vec<String> = cols.iter().map(|c| column(r, c).to_string()).collect();
                let _ = writeln!(out, "{},{}", r.name, values.join(","));
            }
        }
        TableFormat::Table => {
            let width = rows
                .iter()
                .map(|r| r.name.len())
                .max()
                .unwrap_or(0)
                .max("scenario".len());
            let _ = write!(out, "{:<width$}", "scenario");
            for c in cols {
                let _ = write!(out, "  {c:>20}");
            }
            out.push('\n');
            for r in rows {
                let _ = write!(out, "{:<width$}", r.name);
                for c in cols {
                    let _ = write!(out, "  {:>20.3}", column(r, c));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn compare(requests: &[SimRequest]) -> Result<Vec<ScenarioSummary>> {
    if requests.len() < 2 {
        bail!("compare needs at least two scenarios");
    }
    requests
        .iter()
        .map(|r| Ok(api::simulate(r)?.summary()))
        .collect()
}

pub struct FitOutcome {
    pub result: FitResult,
    /// Input scenario with the fitted scale added to its overrides.
    pub scenario: ScenarioFile,
}

pub fn fit(req: &SimRequest, observed_csv: &str, column: &str, grid: &Grid) -> Result<FitOutcome> {
    let observed = ingest_column("daily_confirmed", observed_csv, column)?;
    let (spec, mut overrides) = req.resolve()?;
    let horizon = req.horizon.unwrap_or(DEFAULT_HORIZON);
    spec.validate(horizon)?;
    let params = ModelParams::default().with_overrides(&overrides)?;
    let cfg = RunConfig::new(spec.start, horizon).with_dt(req.dt.unwrap_or(1.0));
    let result = fit_transmission_scale(&params, &spec, &cfg, &observed, grid)?;
    overrides.insert("disease.transmission_scale".into(), result.best_scale);
    Ok(FitOutcome {
        scenario: ScenarioFile::from_spec(&spec, overrides),
        result,
    })
}

pub fn fit_report(r: &FitResult) -> String {
    let mut out = String::from("scale,loss\n");
    for (s, l) in r.grid.iter().zip(&r.losses) {
        let _ = writeln!(out, "{s},{l}");
    }
    let _ = writeln!(
        out,
        "best={} loss={} points={}",
        r.best_scale, r.best_loss, r.points_compared
    );
    out
}
