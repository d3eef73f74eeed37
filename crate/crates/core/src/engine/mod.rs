//! Generic stock-and-flow core: equations, schedules, validation and
//! fixed-step Euler integration.

pub mod expr;
pub mod model;
pub mod schedule;
pub mod sim;

pub use expr::{
    eval_expression, parse_expression, BinaryOp, Env, EvalError, Expr, Func, ParseError,
};
pub use model::{
    validate_model, AuxiliaryDef, Defect, DefineError, EntityKind, EquationDef, FlowDef, ModelDef,
    ScheduleDef, StockDef, Unit, ValidationReport,
};
pub use schedule::{eval_schedule, Schedule, ScheduleError};
pub use sim::{
    run, step, ClampEvent, CompiledModel, EngineError, RunConfig, SimState, SimulationResult,
};
