//! Stock-and-flow simulation of disease spread, people flow and restaurant
//! demand under non-pharmaceutical interventions in Tokyo, 2020.

pub mod api;
pub mod engine;
pub mod metrics;
pub mod tokyo;

pub use engine::{run, CompiledModel, ModelDef, RunConfig, Schedule, SimulationResult};
pub use tokyo::{build_model, preset, ModelParams, PresetId, ScenarioSpec};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
