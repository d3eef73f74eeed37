use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::{parse_expression, Expr, ParseError};
use super::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Persons,
    PersonsPerDay,
    PersonsPerHour,
    Dimensionless,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Persons => "persons",
            Unit::PersonsPerDay => "persons/day",
            Unit::PersonsPerHour => "persons/hour",
            Unit::Dimensionless => "dimensionless",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockDef {
    pub name: String,
    pub initial: f64,
    pub inflows: Vec<String>,
    pub outflows: Vec<String>,
    pub non_negative: bool,
}

impl StockDef {
    pub fn new(name: impl Into<String>, initial: f64) -> Self {
        StockDef {
            name: name.into(),
            initial,
            inflows: Vec::new(),
            outflows: Vec::new(),
            non_negative: true,
        }
    }

    pub fn inflow(mut self, flow: impl Into<String>) -> Self {
        self.inflows.push(flow.into());
        self
    }

    pub fn outflow(mut self, flow: impl Into<String>) -> Self {
        self.outflows.push(flow.into());
        self
    }

    pub fn allow_negative(mut self) -> Self {
        self.non_negative = false;
        self
    }
}

/// A named equation. Used for both flows and auxiliaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationDef {
    pub name: String,
    pub expr: Expr,
    pub unit: Unit,
}

pub type FlowDef = EquationDef;
pub type AuxiliaryDef = EquationDef;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDef {
    pub name: String,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Stock,
    Flow,
    Auxiliary,
    Schedule,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Stock => "stock",
            EntityKind::Flow => "flow",
            EntityKind::Auxiliary => "auxiliary",
            EntityKind::Schedule => "schedule",
        })
    }
}

/// Stocks, flows, auxiliaries and schedule inputs of a stock-and-flow model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelDef {
    pub stocks: Vec<StockDef>,
    pub flows: Vec<FlowDef>,
    pub auxiliaries: Vec<AuxiliaryDef>,
    pub schedules: Vec<ScheduleDef>,
}

#[derive(Debug, Error)]
pub enum DefineError {
    #[error("equation for `{name}`: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
}

impl ModelDef {
    pub fn new() -> Self {
        ModelDef::default()
    }

    pub fn add_stock(&mut self, stock: StockDef) -> &mut Self {
        self.stocks.push(stock);
        self
    }

    pub fn add_flow(
        &mut self,
        name: &str,
        equation: &str,
        unit: Unit,
    ) -> Result<&mut Self, DefineError> {
        let expr = parse_named(name, equation)?;
        self.flows.push(EquationDef {
            name: name.to_string(),
            expr,
            unit,
        });
        Ok(self)
    }

    pub fn add_auxiliary(
        &mut self,
        name: &str,
        equation: &str,
        unit: Unit,
    ) -> Result<&mut Self, DefineError> {
        let expr = parse_named(name, equation)?;
        self.auxiliaries.push(EquationDef {
            name: name.to_string(),
            expr,
            unit,
        });
        Ok(self)
    }

    /// Auxiliary holding a fixed value.
    pub fn add_constant(&mut self, name: &str, value: f64, unit: Unit) -> &mut Self {
        self.auxiliaries.push(EquationDef {
            name: name.to_string(),
            expr: Expr::Const(value),
            unit,
        });
        self
    }

    pub fn add_schedule(&mut self, name: &str, schedule: Schedule) -> &mut Self {
        self.schedules.push(ScheduleDef {
            name: name.to_string(),
            schedule,
        });
        self
    }

    pub fn kind_of(&self, name: &str) -> Option<EntityKind> {
        if self.stocks.iter().any(|s| s.name == name) {
            Some(EntityKind::Stock)
        } else if self.flows.iter().any(|f| f.name == name) {
            Some(EntityKind::Flow)
        } else if self.auxiliaries.iter().any(|a| a.name == name) {
            Some(EntityKind::Auxiliary)
        } else if self.schedules.iter().any(|s| s.name == name) {
            Some(EntityKind::Schedule)
        } else {
            None
        }
    }

    pub fn stock(&self, name: &str) -> Option<&StockDef> {
        self.stocks.iter().find(|s| s.name == name)
    }

    pub fn flow(&self, name: &str) -> Option<&FlowDef> {
        self.flows.iter().find(|f| f.name == name)
    }

    pub fn auxiliary(&self, name: &str) -> Option<&AuxiliaryDef> {
        self.auxiliaries.iter().find(|a| a.name == name)
    }

    pub fn schedule(&self, name: &str) -> Option<&Schedule> {
        self.schedules
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.schedule)
    }
}

fn parse_named(name: &str, equation: &str) -> Result<Expr, DefineError> {
    parse_expression(equation).map_err(|source| DefineError::Parse {
        name: name.to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    DuplicateName {
        name: String,
    },
    UnknownReference {
        entity: String,
        name: String,
    },
    /// Equations may read stocks, auxiliaries and schedules, not flow rates.
    FlowReference {
        entity: String,
        flow: String,
    },
    UnknownFlow {
        stock: String,
        flow: String,
    },
    Cycle {
        path: Vec<String>,
    },
    FlowUnit {
        flow: String,
        unit: Unit,
    },
    NonFiniteInitial {
        stock: String,
    },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::DuplicateName { name } => write!(f, "duplicate name `{name}`"),
            Defect::UnknownReference { entity, name } => {
                write!(f, "`{entity}` references undeclared `{name}`")
            }
            Defect::FlowReference { entity, flow } => {
                write!(
                    f,
                    "`{entity}` references flow `{flow}`; use an auxiliary instead"
                )
            }
            Defect::UnknownFlow { stock, flow } => {
                write!(f, "stock `{stock}` lists undeclared flow `{flow}`")
            }
            Defect::Cycle { path } => write!(f, "auxiliary cycle: {}", path.join(" -> ")),
            Defect::FlowUnit { flow, unit } => {
                write!(f, "flow `{flow}` has unit {unit}, expected persons/day")
            }
            Defect::NonFiniteInitial { stock } => {
                write!(f, "stock `{stock}` has a non-finite initial value")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.defects.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

pub fn validate_model(model: &ModelDef) -> ValidationReport {
    let mut defects = Vec::new();

    let mut kinds: HashMap<&str, EntityKind> = HashMap::new();
    let all_names = model
        .stocks
        .iter()
        .map(|s| (s.name.as_str(), EntityKind::Stock))
        .chain(
            model
                .flows
                .iter()
                .map(|f| (f.name.as_str(), EntityKind::Flow)),
        )
        .chain(
            model
                .auxiliaries
                .iter()
                .map(|a| (a.name.as_str(), EntityKind::Auxiliary)),
        )
        .chain(
            model
                .schedules
                .iter()
                .map(|s| (s.name.as_str(), EntityKind::Schedule)),
        );
    for (name, kind) in all_names {
        if kinds.insert(name, kind).is_some() {
            let d = Defect::DuplicateName {
                name: name.to_string(),
            };
            if !defects.contains(&d) {
                defects.push(d);
            }
        }
    }

    for s in &model.stocks {
        if !s.initial.is_finite() {
            defects.push(Defect::NonFiniteInitial {
                stock: s.name.clone(),
            });
        }
        for flow in s.inflows.iter().chain(&s.outflows) {
            if kinds.get(flow.as_str()) != Some(&EntityKind::Flow) {
                defects.push(Defect::UnknownFlow {
                    stock: s.name.clone(),
                    flow: flow.clone(),
                });
            }
        }
    }

    for f in &model.flows {
        if f.unit != Unit::PersonsPerDay {
            defects.push(Defect::FlowUnit {
                flow: f.name.clone(),
                unit: f.unit,
            });
        }
    }

    for eq in model.flows.iter().chain(&model.auxiliaries) {
        for r in eq.expr.references() {
            match kinds.get(r) {
                None => defects.push(Defect::UnknownReference {
                    entity: eq.name.clone(),
                    name: r.to_string(),
                }),
                Some(EntityKind::Flow) => defects.push(Defect::FlowReference {
                    entity: eq.name.clone(),
                    flow: r.to_string(),
                }),
                Some(_) => {}
            }
        }
    }

    if let Err(cycles) = auxiliary_order(model) {
        defects.extend(cycles.into_iter().map(|path| Defect::Cycle { path }));
    }

    ValidationReport { defects }
}

/// Topological order over auxiliaries (indices into `model.auxiliaries`),
/// or every cycle found.
pub(crate) fn auxiliary_order(model: &ModelDef) -> Result<Vec<usize>, Vec<Vec<String>>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }

    let index: HashMap<&str, usize> = model
        .auxiliaries
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name.as_str(), i))
        .collect();
    let deps: Vec<Vec<usize>> = model
        .auxiliaries
        .iter()
        .map(|a| {
            a.expr
                .references()
                .into_iter()
                .filter_map(|r| index.get(r).copied())
                .collect()
        })
        .collect();

    let n = deps.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut cycles = Vec::new();

    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next dep position)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if let Some(&dep) = deps[node].get(top.1) {
                top.1 += 1;
                match mark[dep] {
                    Mark::New => {
                        mark[dep] = Mark::Active;
                        stack.push((dep, 0));
                    }
                    Mark::Active => {
                        let start = stack.iter().position(|&(n, _)| n == dep).unwrap_or(0);
                        let path = stack[start..]
                            .iter()
                            .map(|&(n, _)| model.auxiliaries[n].name.clone())
                            .collect();
                        cycles.push(path);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                order.push(node);
                stack.pop();
            }
        }
    }

    if cycles.is_empty() {
        Ok(order)
    } else {
        Err(cycles)
    }
}
