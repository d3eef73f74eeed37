use std::collections::HashMap;

use chrono::{Days, NaiveDate};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::{EvalError, Expr};
use super::model::{auxiliary_order, validate_model, EntityKind, ModelDef, ValidationReport};
use super::schedule::Schedule;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("state is missing stock `{0}`")]
    MissingStock(String),
    #[error("evaluating `{entity}` at t={time}: {source}")]
    Eval {
        entity: String,
        time: f64,
        #[source]
        source: EvalError,
    },
    #[error("`{entity}` became non-finite ({value}) at t={time}")]
    NonFinite {
        entity: String,
        time: f64,
        value: f64,
    },
    #[error("day {day}: {source}")]
    AtDay {
        day: u32,
        #[source]
        source: Box<EngineError>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub start: NaiveDate,
    pub horizon: u32,
    pub dt: f64,
}

impl RunConfig {
    pub fn new(start: NaiveDate, horizon: u32) -> Self {
        RunConfig {
            start,
            horizon,
            dt: 1.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Number of integration steps per recorded day.
    pub fn steps_per_day(&self) -> Result<u32, EngineError> {
        if self.horizon < 1 {
            return Err(EngineError::Config("horizon must be at least 1 day".into()));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(EngineError::Config(format!(
                "dt must be in (0, 1], got {}",
                self.dt
            )));
        }
        let n = (1.0 / self.dt).round();
        if ((n * self.dt) - 1.0).abs() > 1e-9 {
            return Err(EngineError::Config(format!(
                "dt {} does not divide one day",
                self.dt
            )));
        }
        Ok(n as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time: f64,
    pub stocks: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub time: f64,
    pub stock: String,
    /// Value before clamping.
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub dates: Vec<NaiveDate>,
    /// Stocks, flows, auxiliaries and schedules, each sampled once per day.
    pub series: IndexMap<String, Vec<f64>>,
    pub kinds: IndexMap<String, EntityKind>,
    pub clamp_events: Vec<ClampEvent>,
}

impl SimulationResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>, String),
    Min(Vec<Node>),
    Max(Vec<Node>),
    Clamp(Box<[Node; 3]>),
}

impl Node {
    fn compile(e: &Expr, slots: &HashMap<&str, usize>) -> Node {
        use super::expr::{BinaryOp, Func};
        let sub = |e: &Expr| Box::new(Node::compile(e, slots));
        match e {
            Expr::Const(v) => Node::Const(*v),
            // references are resolved by validation before compiling
            Expr::Ref(name) => Node::Slot(slots[name.as_str()]),
            Expr::Neg(inner) => Node::Neg(sub(inner)),
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::Add => Node::Add(sub(lhs), sub(rhs)),
                BinaryOp::Sub => Node::Sub(sub(lhs), sub(rhs)),
                BinaryOp::Mul => Node::Mul(sub(lhs), sub(rhs)),
                BinaryOp::Div => Node::Div(sub(lhs), sub(rhs), e.to_string()),
            },
            Expr::Call { func, args } => {
                let args: Vec<Node> = args.iter().map(|a| Node::compile(a, slots)).collect();
                match func {
                    Func::Min => Node::Min(args),
                    Func::Max => Node::Max(args),
                    Func::Clamp => {
                        let [x, lo, hi]: [Node; 3] =
                            args.try_into().expect("clamp arity checked by parser");
                        Node::Clamp(Box::new([x, lo, hi]))
                    }
                }
            }
        }
    }

    fn eval(&self, v: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Node::Const(c) => *c,
            Node::Slot(i) => v[*i],
            Node::Neg(a) => -a.eval(v)?,
            Node::Add(a, b) => a.eval(v)? + b.eval(v)?,
            Node::Sub(a, b) => a.eval(v)? - b.eval(v)?,
            Node::Mul(a, b) => a.eval(v)? * b.eval(v)?,
            Node::Div(a, b, text) => {
                let num = a.eval(v)?;
                let den = b.eval(v)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero(text.clone()));
                }
                num / den
            }
            Node::Min(args) => {
                let mut acc = f64::INFINITY;
                for a in args {
                    acc = acc.min(a.eval(v)?);
                }
                acc
            }
            Node::Max(args) => {
                let mut acc = f64::NEG_INFINITY;
                for a in args {
                    acc = acc.max(a.eval(v)?);
                }
                acc
            }
            Node::Clamp(parts) => {
                let [x, lo, hi] = parts.as_ref();
                x.eval(v)?.max(lo.eval(v)?).min(hi.eval(v)?)
            }
        })
    }
}

#[derive(Debug, Clone)]
struct CompiledStock {
    initial: f64,
    inflows: Vec<usize>,
    outflows: Vec<usize>,
    non_negative: bool,
}

/// A validated model with references resolved to value slots.
///
/// Slots hold stocks, schedules, auxiliaries and flows in declaration order.
/// Auxiliaries are evaluated in dependency order.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    names: Vec<String>,
    kinds: Vec<EntityKind>,
    stocks: Vec<CompiledStock>,
    schedules: Vec<Schedule>,
    aux_base: usize,
    aux_order: Vec<(usize, Node)>,
    flow_base: usize,
    flows: Vec<Node>,
}

impl CompiledModel {
    pub fn new(model: &ModelDef) -> Result<Self, EngineError> {
        let report = validate_model(model);
        if !report.is_empty() {
            return Err(EngineError::Invalid(report));
        }
        let order = auxiliary_order(model).expect("validated model is acyclic");

        let mut names = Vec::new();
        let mut kinds = Vec::new();
        for s in &model.stocks {
            names.push(s.name.clone());
            kinds.push(EntityKind::Stock);
        }
        for s in &model.schedules {
            names.push(s.name.clone());
            kinds.push(EntityKind::Schedule);
        }
        let aux_base = names.len();
        for a in &model.auxiliaries {
            names.push(a.name.clone());
            kinds.push(EntityKind::Auxiliary);
        }
        let flow_base = names.len();
        for f in &model.flows {
            names.push(f.name.clone());
            kinds.push(EntityKind::Flow);
        }
        let slots: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();

        let stocks = model
            .stocks
            .iter()
            .map(|s| CompiledStock {
                initial: s.initial,
                inflows: s.inflows.iter().map(|f| slots[f.as_str()]).collect(),
                outflows: s.outflows.iter().map(|f| slots[f.as_str()]).collect(),
                non_negative: s.non_negative,
            })
            .collect();
        let aux_order = order
            .into_iter()
            .map(|i| {
                (
                    aux_base + i,
                    Node::compile(&model.auxiliaries[i].expr, &slots),
                )
            })
            .collect();
        let flows = model
            .flows
            .iter()
            .map(|f| Node::compile(&f.expr, &slots))
            .collect();

        Ok(CompiledModel {
            names,
            kinds,
            stocks,
            schedules: model.schedules.iter().map(|s| s.schedule.clone()).collect(),
            aux_base,
            aux_order,
            flow_base,
            flows,
        })
    }

    pub fn stock_names(&self) -> impl Iterator<Item = &str> {
        self.names[..self.stocks.len()].iter().map(String::as_str)
    }

    pub fn initial_state(&self) -> SimState {
        SimState {
            time: 0.0,
            stocks: self
                .stock_names()
                .map(str::to_string)
                .zip(self.stocks.iter().map(|s| s.initial))
                .collect(),
        }
    }

    /// Fills `values` with every slot at `time` given the stock levels.
    fn evaluate(&self, time: f64, stocks: &[f64], values: &mut [f64]) -> Result<(), EngineError> {
        let ns = self.stocks.len();
        values[..ns].copy_from_slice(stocks);
        for (i, s) in self.schedules.iter().enumerate() {
            values[ns + i] = s.eval(time);
        }
        let check = |slot: usize, r: Result<f64, EvalError>| -> Result<f64, EngineError> {
            let value = r.map_err(|source| EngineError::Eval {
                entity: self.names[slot].clone(),
                time,
                source,
            })?;
            if !value.is_finite() {
                return Err(EngineError::NonFinite {
                    entity: self.names[slot].clone(),
                    time,
                    value,
                });
            }
            Ok(value)
        };
        for (slot, node) in &self.aux_order {
            values[*slot] = check(*slot, node.eval(values))?;
        }
        for (i, node) in self.flows.iter().enumerate() {
            let slot = self.flow_base + i;
            values[slot] = check(slot, node.eval(values))?;
        }
        Ok(())
    }

    /// Euler update of `stocks` in place using already evaluated flows.
    fn advance(
        &self,
        time: f64,
        values: &[f64],
        stocks: &mut [f64],
        dt: f64,
        clamps: &mut Vec<ClampEvent>,
    ) -> Result<(), EngineError> {
        for (i, s) in self.stocks.iter().enumerate() {
            let inflow: f64 = s.inflows.iter().map(|&f| values[f]).sum();
            let outflow: f64 = s.outflows.iter().map(|&f| values[f]).sum();
            let mut next = stocks[i] + (inflow - outflow) * dt;
            if !next.is_finite() {
                return Err(EngineError::NonFinite {
                    entity: self.names[i].clone(),
                    time: time + dt,
                    value: next,
                });
            }
            if s.non_negative && next < 0.0 {
                log::debug!(
                    "clamping stock {} at t={} (raw {next})",
                    self.names[i],
                    time + dt
                );
                clamps.push(ClampEvent {
                    time: time + dt,
                    stock: self.names[i].clone(),
                    raw: next,
                });
                next = 0.0;
            }
            stocks[i] = next;
        }
        Ok(())
    }

    fn stocks_from_state(&self, state: &SimState) -> Result<Vec<f64>, EngineError> {
        self.stock_names()
            .map(|n| {
                state
                    .stocks
                    .get(n)
                    .copied()
                    .ok_or_else(|| EngineError::MissingStock(n.to_string()))
            })
            .collect()
    }

    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState, EngineError> {
        let mut stocks = self.stocks_from_state(state)?;
        let mut values = vec![0.0; self.names.len()];
        self.evaluate(state.time, &stocks, &mut values)?;
        self.advance(state.time, &values, &mut stocks, dt, &mut Vec::new())?;
        Ok(SimState {
            time: state.time + dt,
            stocks: self.stock_names().map(str::to_string).zip(stocks).collect(),
        })
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<SimulationResult, EngineError> {
        let steps = cfg.steps_per_day()?;
        let dt = cfg.dt;
        let records = cfg.horizon as usize + 1;

        let mut stocks: Vec<f64> = self.stocks.iter().map(|s| s.initial).collect();
        let mut values = vec![0.0; self.names.len()];
        let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(records); self.names.len()];
        let mut clamps = Vec::new();

        for day in 0..=cfg.horizon {
            let at_day = |source: EngineError| EngineError::AtDay {
                day,
                source: Box::new(source),
            };
            let t0 = f64::from(day);
            self.evaluate(t0, &stocks, &mut values).map_err(at_day)?;
            for (col, v) in columns.iter_mut().zip(&values) {
                col.push(*v);
            }
            if day == cfg.horizon {
                break;
            }
            for k in 0..steps {
                let t = t0 + f64::from(k) * dt;
                if k > 0 {
                    self.evaluate(t, &stocks, &mut values).map_err(at_day)?;
                }
                self.advance(t, &values, &mut stocks, dt, &mut clamps)
                    .map_err(at_day)?;
            }
        }

        let dates = (0..records as u64)
            .map(|d| {
                cfg.start
                    .checked_add_days(Days::new(d))
                    .ok_or_else(|| EngineError::Config("date out of range".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        // output order: stocks, flows, auxiliaries, schedules
        let ns = self.stocks.len();
        let order = (0..ns)
            .chain(self.flow_base..self.names.len())
            .chain(self.aux_base..self.flow_base)
            .chain(ns..self.aux_base);
        let mut series = IndexMap::with_capacity(self.names.len());
        let mut kinds = IndexMap::with_capacity(self.names.len());
        let mut columns: Vec<Option<Vec<f64>>> = columns.into_iter().map(Some).collect();
        for slot in order {
            let name = self.names[slot].clone();
            kinds.insert(name.clone(), self.kinds[slot]);
            series.insert(name, columns[slot].take().unwrap_or_default());
        }

        Ok(SimulationResult {
            dates,
            series,
            kinds,
            clamp_events: clamps,
        })
    }
}

pub fn step(model: &CompiledModel, state: &SimState, dt: f64) -> Result<SimState, EngineError> {
    model.step(state, dt)
}

pub fn run(model: &ModelDef, cfg: &RunConfig) -> Result<SimulationResult, EngineError> {
    CompiledModel::new(model)?.run(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::model::{StockDef, Unit};

    fn decay(rate: f64) -> ModelDef {
        let mut m = ModelDef::new();
        m.add_stock(StockDef::new("S", 100.0).outflow("out"));
        m.add_constant("rate", rate, Unit::Dimensionless);
        m.add_flow("out", "rate * S", Unit::PersonsPerDay).unwrap();
        m
    }

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap()
    }

    #[test]
    fn single_and_double_step() {
        let m = CompiledModel::new(&decay(0.1)).unwrap();
        let s1 = m.step(&m.initial_state(), 1.0).unwrap();
        assert!((s1.stocks["S"] - 90.0).abs() < 1e-12);
        let s2 = m.step(&s1, 1.0).unwrap();
        assert!((s2.stocks["S"] - 81.0).abs() < 1e-12);
        assert_eq!(s2.time, 2.0);
    }

    #[test]
    fn half_steps() {
        let m = CompiledModel::new(&decay(0.1)).unwrap();
        let s = m
            .step(&m.step(&m.initial_state(), 0.5).unwrap(), 0.5)
            .unwrap();
        assert!((s.stocks["S"] - 90.25).abs() < 1e-12);
    }

    #[test]
    fn horizon_two_gives_three_records() {
        let r = run(&decay(0.1), &RunConfig::new(start(), 2)).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.dates[2], NaiveDate::from_ymd_opt(2020, 3, 3).unwrap());
        assert!(r.series.values().all(|s| s.len() == 3));
    }

    #[test]
    fn config_validation() {
        let m = decay(0.1);
        for cfg in [
            RunConfig::new(start(), 0),
            RunConfig::new(start(), 5).with_dt(0.0),
            RunConfig::new(start(), 5).with_dt(1.5),
            RunConfig::new(start(), 5).with_dt(0.3),
        ] {
            assert!(
                matches!(run(&m, &cfg), Err(EngineError::Config(_))),
                "{cfg:?}"
            );
        }
        assert!(run(&m, &RunConfig::new(start(), 5).with_dt(0.125)).is_ok());
    }

    #[test]
    fn clamps_at_zero_and_logs_event() {
        let r = run(&decay(1.5), &RunConfig::new(start(), 3)).unwrap();
        let s = r.series("S").unwrap();
        assert_eq!(s[1], 0.0);
        assert!(s.iter().all(|&v| v >= 0.0));
        assert_eq!(r.clamp_events.len(), 1);
        assert_eq!(r.clamp_events[0].stock, "S");
        assert!((r.clamp_events[0].raw + 50.0).abs() < 1e-12);
    }

    #[test]
    fn negative_allowed_when_flag_cleared() {
        let mut m = decay(1.5);
        m.stocks[0] = m.stocks[0].clone().allow_negative();
        let r = run(&m, &RunConfig::new(start(), 1)).unwrap();
        assert_eq!(r.series("S").unwrap()[1], -50.0);
    }

    #[test]
    fn division_by_zero_reports_entity_and_day() {
        let mut m = ModelDef::new();
        m.add_stock(StockDef::new("S", 2.0).outflow("out"));
        m.add_flow("out", "1 / (S - 1)", Unit::PersonsPerDay)
            .unwrap();
        let err = run(&m, &RunConfig::new(start(), 5)).unwrap_err();
        match err {
            EngineError::AtDay { day, source } => {
                assert_eq!(day, 1);
                assert!(matches!(*source, EngineError::Eval { ref entity, .. } if entity == "out"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overflow_aborts_with_name() {
        let mut m = ModelDef::new();
        m.add_stock(StockDef::new("X", 1e300).inflow("grow"));
        m.add_flow("grow", "X * 1e10", Unit::PersonsPerDay).unwrap();
        let err = run(&m, &RunConfig::new(start(), 3)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("grow") || msg.contains('X'), "{msg}");
    }

    #[test]
    fn invalid_model_refused() {
        let mut m = decay(0.1);
        m.add_flow("bad", "nope", Unit::PersonsPerDay).unwrap();
        assert!(matches!(
            run(&m, &RunConfig::new(start(), 1)),
            Err(EngineError::Invalid(_))
        ));
    }

    #[test]
    fn step_requires_complete_state() {
        let m = CompiledModel::new(&decay(0.1)).unwrap();
        let state = SimState {
            time: 0.0,
            stocks: IndexMap::new(),
        };
        assert!(matches!(
            m.step(&state, 1.0),
            Err(EngineError::MissingStock(_))
        ));
    }

    #[test]
    fn schedules_are_recorded() {
        let mut m = decay(0.1);
        m.add_schedule("pulse", Schedule::new(0.0, vec![(2, 1.0)]).unwrap());
        let r = run(&m, &RunConfig::new(start(), 3)).unwrap();
        assert_eq!(r.series("pulse").unwrap(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(r.kinds["pulse"], EntityKind::Schedule);
    }
}
