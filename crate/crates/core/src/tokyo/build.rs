use crate::engine::{validate_model, ModelDef, StockDef, Unit};

use super::params::ModelParams;
use super::scenario::ScenarioSpec;
use super::TokyoError;

/// Stocks whose sum is conserved: every person infected stays in one of them.
pub const EPIDEMIOLOGICAL_STOCKS: [&str; 9] = [
    "Susceptible",
    "Infected",
    "Apparent",
    "Inapparent",
    "Confirmed",
    "NotTested",
    "Hospitalised",
    "RecoveredInapparent",
    "RecoveredNotTested",
];

/// Assembles disease transmission, people flow/behaviour and restaurant
/// demand into one stock-and-flow model driven by `scenario`.
pub fn build_model(params: &ModelParams, scenario: &ScenarioSpec) -> Result<ModelDef, TokyoError> {
    params.validate()?;
    let d = &params.disease;
    let mb = &params.mobility;
    let r = &params.restaurant;
    let start = scenario.start;
    let mut m = ModelDef::new();

    // disease transmission
    let init = &d.initial;
    m.add_stock(StockDef::new("Susceptible", d.total_population).outflow("infection"))
        .add_stock(
            StockDef::new("Infected", init.infected)
                .inflow("infection")
                .outflow("apparent_infection")
                .outflow("inapparent_infection"),
        )
        .add_stock(
            StockDef::new("Apparent", init.apparent)
                .inflow("apparent_infection")
                .outflow("virus_testing")
                .outflow("not_tested"),
        )
        .add_stock(
            StockDef::new("Inapparent", init.inapparent)
                .inflow("inapparent_infection")
                .outflow("inapparent_recovery"),
        )
        .add_stock(
            StockDef::new("Confirmed", init.confirmed)
                .inflow("virus_testing")
                .outflow("hospitalisation"),
        )
        .add_stock(
            StockDef::new("NotTested", init.not_tested)
                .inflow("not_tested")
                .outflow("not_tested_recovery"),
        )
        .add_stock(StockDef::new("Hospitalised", 0.0).inflow("hospitalisation"))
        .add_stock(StockDef::new("RecoveredInapparent", 0.0).inflow("inapparent_recovery"))
        .add_stock(StockDef::new("RecoveredNotTested", 0.0).inflow("not_tested_recovery"))
        .add_stock(StockDef::new("CumulativeConfirmed", 0.0).inflow("confirmed_tally"));

    m.add_schedule(
        "temperature_effect",
        d.temperature_effect.to_schedule(start)?,
    )
    .add_schedule("testing_policy", d.testing_policy.to_schedule(start)?)
    .add_schedule(
        "behaviour_guidance",
        mb.behaviour_guidance.to_schedule(start)?,
    );
    for (name, s) in scenario.schedules() {
        m.add_schedule(name, s.clone());
    }

    let w = &d.carrier_weights;
    m.add_constant("total_population", d.total_population, Unit::Persons)
        .add_constant(
            "reproduction_rate_daily",
            d.reproduction_rate_daily,
            Unit::Dimensionless,
        )
        .add_constant(
            "transmission_scale",
            d.transmission_scale,
            Unit::Dimensionless,
        )
        .add_constant("apparent_ratio", d.apparent_ratio, Unit::Dimensionless)
        .add_constant("incubation_days", d.incubation_days, Unit::Dimensionless)
        .add_constant(
            "inapparent_clearance_days",
            d.inapparent_clearance_days,
            Unit::Dimensionless,
        )
        .add_constant(
            "symptomatic_resolution_days",
            d.symptomatic_resolution_days,
            Unit::Dimensionless,
        )
        .add_constant(
            "confirmation_delay_days",
            d.confirmation_delay_days,
            Unit::Dimensionless,
        )
        .add_constant(
            "hospitalisation_delay_days",
            d.hospitalisation_delay_days,
            Unit::Dimensionless,
        )
        .add_constant("carrier_weight_infected", w.infected, Unit::Dimensionless)
        .add_constant(
            "carrier_weight_inapparent",
            w.inapparent,
            Unit::Dimensionless,
        )
        .add_constant("carrier_weight_apparent", w.apparent, Unit::Dimensionless)
        .add_constant(
            "carrier_weight_not_tested",
            w.not_tested,
            Unit::Dimensionless,
        )
        .add_constant("carrier_weight_confirmed", w.confirmed, Unit::Dimensionless);

    m.add_auxiliary(
        "susceptible_ratio",
        "Susceptible / total_population",
        Unit::Dimensionless,
    )?
    .add_auxiliary(
        "carriers",
        "carrier_weight_infected * Infected + carrier_weight_inapparent * Inapparent \
             + carrier_weight_apparent * Apparent + carrier_weight_not_tested * NotTested \
             + carrier_weight_confirmed * Confirmed",
        Unit::Persons,
    )?
    .add_auxiliary(
        "daily_confirmed",
        "Apparent * testing_policy / confirmation_delay_days",
        Unit::PersonsPerDay,
    )?;

    m.add_flow(
        "infection",
        "reproduction_rate_daily * transmission_scale * temperature_effect * susceptible_ratio \
         * flow_mult * behavior_mult * carriers",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "apparent_infection",
        "Infected * apparent_ratio / incubation_days",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "inapparent_infection",
        "Infected * (1 - apparent_ratio) / incubation_days",
        Unit::PersonsPerDay,
    )?
    .add_flow("virus_testing", "daily_confirmed", Unit::PersonsPerDay)?
    .add_flow(
        "not_tested",
        "Apparent * (1 - testing_policy) / confirmation_delay_days",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "inapparent_recovery",
        "Inapparent / inapparent_clearance_days",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "not_tested_recovery",
        "NotTested / symptomatic_resolution_days",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "hospitalisation",
        "Confirmed / hospitalisation_delay_days",
        Unit::PersonsPerDay,
    )?
    .add_flow("confirmed_tally", "daily_confirmed", Unit::PersonsPerDay)?;

    // people flow and behaviour
    let fc = &mb.flow_coefficients;
    m.add_constant(
        "baseline_people_flow",
        mb.baseline_people_flow,
        Unit::PersonsPerHour,
    )
    .add_constant(
        "flow_coef_school_closure",
        fc.school_closure,
        Unit::Dimensionless,
    )
    .add_constant(
        "flow_coef_stay_at_home",
        fc.stay_at_home,
        Unit::Dimensionless,
    )
    .add_constant("flow_coef_short_term", fc.short_term, Unit::Dimensionless)
    .add_constant("flow_coef_new_normal", fc.new_normal, Unit::Dimensionless)
    .add_constant(
        "distancing_factor",
        mb.distancing_factor,
        Unit::Dimensionless,
    )
    .add_constant(
        "protect_prob_epidemic",
        mb.protect_prob_epidemic,
        Unit::Dimensionless,
    )
    .add_constant(
        "protect_prob_normal",
        mb.protect_prob_normal,
        Unit::Dimensionless,
    );
    m.add_auxiliary(
        "flow_mult",
        "max(0, 1 - flow_coef_school_closure * school_closure_commute \
         - flow_coef_stay_at_home * stay_at_home \
         - flow_coef_short_term * short_term_consciousness \
         - flow_coef_new_normal * new_normal)",
        Unit::Dimensionless,
    )?
    .add_auxiliary("people_flow", "baseline_people_flow * flow_mult", Unit::PersonsPerHour)?
    .add_auxiliary(
        "behavior_mult",
        "1 - (protect_prob_normal + (protect_prob_epidemic - protect_prob_normal) * behaviour_guidance) \
         * (1 - distancing_factor)",
        Unit::Dimensionless,
    )?;

    // restaurant demand
    let vc = &r.visit_coefficients;
    let ec = &r.ewom_coefficients;
    m.add_stock(
        StockDef::new("CustomerHome", r.customer_population)
            .inflow("dining_return")
            .outflow("dining_out"),
    )
    .add_stock(
        StockDef::new("CustomerOut", 0.0)
            .inflow("dining_out")
            .outflow("dining_return"),
    );
    m.add_constant(
        "baseline_dining_out",
        r.baseline_dining_out(),
        Unit::PersonsPerDay,
    )
    .add_constant(
        "dining_return_days",
        r.dining_return_days,
        Unit::Dimensionless,
    )
    .add_constant(
        "visit_coef_school_closure",
        vc.school_closure,
        Unit::Dimensionless,
    )
    .add_constant(
        "visit_coef_stay_at_home",
        vc.stay_at_home,
        Unit::Dimensionless,
    )
    .add_constant("visit_coef_mid_term", vc.mid_term, Unit::Dimensionless)
    .add_constant("visit_coef_focused", vc.focused, Unit::Dimensionless)
    .add_constant("visit_coef_long_term", vc.long_term, Unit::Dimensionless)
    .add_constant(
        "ewom_coef_school_closure",
        ec.school_closure,
        Unit::Dimensionless,
    )
    .add_constant("ewom_coef_long_term", ec.long_term, Unit::Dimensionless)
    .add_constant(
        "ewom_coef_stay_at_home",
        ec.stay_at_home,
        Unit::Dimensionless,
    )
    .add_constant("ewom_coef_focused", ec.focused, Unit::Dimensionless)
    .add_constant("ewom_coef_mid_term", ec.mid_term, Unit::Dimensionless);
    m.add_auxiliary(
        "visits_normalized",
        "1 - visit_coef_school_closure * school_closure_psych \
         - visit_coef_stay_at_home * stay_at_home \
         - visit_coef_mid_term * mid_term_consciousness \
         - visit_coef_focused * focused_intervention \
         - visit_coef_long_term * long_term_consciousness",
        Unit::Dimensionless,
    )?
    .add_auxiliary(
        "ewom_mass",
        "1 - ewom_coef_school_closure * school_closure_psych \
         - ewom_coef_long_term * long_term_consciousness \
         - ewom_coef_stay_at_home * stay_at_home \
         - ewom_coef_focused * focused_intervention \
         - ewom_coef_mid_term * mid_term_consciousness",
        Unit::Dimensionless,
    )?;
    m.add_flow(
        "dining_out",
        "baseline_dining_out * visits_normalized",
        Unit::PersonsPerDay,
    )?
    .add_flow(
        "dining_return",
        "CustomerOut / dining_return_days",
        Unit::PersonsPerDay,
    )?;

    let report = validate_model(&m);
    if !report.is_empty() {
        return Err(TokyoError::Invalid(report));
    }
    Ok(m)
}
