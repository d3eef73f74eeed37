use std::collections::BTreeMap;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use npisim_cli::commands::{self, Metric, OutputFormat, Source, TableFormat};
use npisim_core::api::{self, SimRequest};
use npisim_core::metrics::Grid;

#[derive(Parser)]
#[command(name = "npisim", version, about = "Tokyo NPI scenario simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write every series as CSV or JSON.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Output file; `-` or omitted writes to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Also write a line chart of daily confirmed positives.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Summarise two or more scenarios side by side.
    Compare {
        /// Preset names or scenario JSON files.
        #[arg(required = true, num_args = 2..)]
        sources: Vec<String>,
        #[arg(long, value_enum, default_value_t = Metric::All)]
        metric: Metric,
        #[arg(long, value_enum, default_value_t = TableFormat::Table)]
        format: TableFormat,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Grid-search the transmission scale against observed daily positives.
    Fit {
        /// CSV with a `date` column.
        #[arg(long)]
        observed: PathBuf,
        /// Value column to read.
        #[arg(long, default_value = "value")]
        column: String,
        /// MIN:MAX:STEP
        #[arg(long, value_parser = commands::parse_grid, default_value = "0.5:2.0:0.1")]
        grid: Grid,
        #[command(flatten)]
        source: OptionalSourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Write the scenario with the fitted scale as an override.
        #[arg(long)]
        write_scenario: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "NPISIM_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "NPISIM_HOST", default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    #[arg(long)]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
#[group(multiple = false)]
struct OptionalSourceArgs {
    /// Defaults to `realistic`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Parameter override, e.g. `disease.transmission_scale=1.3`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE", value_parser = commands::parse_override)]
    overrides: Vec<(String, f64)>,
    /// Days after the start date.
    #[arg(long)]
    horizon: Option<u32>,
    /// Integration step in days; must divide 1.
    #[arg(long)]
    dt: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> BTreeMap<String, f64> {
        self.overrides.iter().cloned().collect()
    }

    fn apply(&self, mut req: SimRequest) -> SimRequest {
        req.param_overrides.extend(self.overrides());
        req.horizon = self.horizon;
        req.dt = self.dt;
        req
    }
}

fn source(preset: Option<String>, scenario: Option<PathBuf>) -> Source {
    match scenario {
        Some(path) => Source::File(path),
        None => Source::Preset(preset.unwrap_or_else(|| "realistic".into())),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            source: s,
            run,
            out,
            format,
            svg,
        } => {
            let req = run.apply(source(s.preset, s.scenario).request()?);
            let resp = api::simulate(&req)?;
            commands::write_output(out.as_deref(), &commands::render(&resp, format)?)?;
            if let Some(path) = svg {
                fs::write(&path, commands::chart(&resp))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Compare {
            sources,
            metric,
            format,
            run,
        } => {
            let requests = sources
                .iter()
                .map(|s| Ok(run.apply(Source::parse(s).request()?)))
                .collect::<Result<Vec<_>>>()?;
            let rows = commands::compare(&requests)?;
            print!("{}", commands::compare_table(&rows, metric, format));
        }
        Command::Fit {
            observed,
            column,
            grid,
            source: s,
            run,
            write_scenario,
        } => {
            let req = run.apply(source(s.preset, s.scenario).request()?);
            let text = fs::read_to_string(&observed)
                .with_context(|| format!("reading {}", observed.display()))?;
            let outcome = commands::fit(&req, &text, &column, &grid)
                .with_context(|| format!("fitting against {}", observed.display()))?;
            print!("{}", commands::fit_report(&outcome.result));
            if let Some(path) = write_scenario {
                let json = serde_json::to_string_pretty(&outcome.scenario)? + "\n";
                fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(npisim_cli::server::serve(SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
