//! Closed-form versions of the model's multiplier equations.
//!
//! The model builder writes the same arithmetic, in the same order, as
//! equation text; economic outputs can therefore be checked bit for bit
//! against these functions.

use super::params::{DiseaseParams, EwomCoefficients, FlowCoefficients, VisitCoefficients};

impl FlowCoefficients {
    /// Maximum people flow relative to baseline, floored at 0.
    pub fn multiplier(
        &self,
        school_commute: f64,
        stay_home: f64,
        short_term: f64,
        new_normal: f64,
    ) -> f64 {
        (1.0 - self.school_closure * school_commute
            - self.stay_at_home * stay_home
            - self.short_term * short_term
            - self.new_normal * new_normal)
            .max(0.0)
    }
}

impl VisitCoefficients {
    pub fn multiplier(
        &self,
        school_psych: f64,
        stay_home: f64,
        mid_term: f64,
        focused: f64,
        long_term: f64,
    ) -> f64 {
        1.0 - self.school_closure * school_psych
            - self.stay_at_home * stay_home
            - self.mid_term * mid_term
            - self.focused * focused
            - self.long_term * long_term
    }
}

impl EwomCoefficients {
    pub fn multiplier(
        &self,
        school_psych: f64,
        long_term: f64,
        stay_home: f64,
        focused: f64,
        mid_term: f64,
    ) -> f64 {
        1.0 - self.school_closure * school_psych
            - self.long_term * long_term
            - self.stay_at_home * stay_home
            - self.focused * focused
            - self.mid_term * mid_term
    }
}

pub fn people_flow_multiplier(
    school_commute: f64,
    stay_home: f64,
    short_term: f64,
    new_normal: f64,
) -> f64 {
    FlowCoefficients::default().multiplier(school_commute, stay_home, short_term, new_normal)
}

pub fn visits_multiplier(
    school_psych: f64,
    stay_home: f64,
    mid_term: f64,
    focused: f64,
    long_term: f64,
) -> f64 {
    VisitCoefficients::default().multiplier(school_psych, stay_home, mid_term, focused, long_term)
}

pub fn ewom_multiplier(
    school_psych: f64,
    long_term: f64,
    stay_home: f64,
    focused: f64,
    mid_term: f64,
) -> f64 {
    EwomCoefficients::default().multiplier(school_psych, long_term, stay_home, focused, mid_term)
}

/// Protective-behaviour probability moves from the normal to the epidemic
/// value as behaviour guidance goes from 0 to 1.
pub fn effective_protection(protect_normal: f64, protect_epidemic: f64, guidance: f64) -> f64 {
    protect_normal + (protect_epidemic - protect_normal) * guidance
}

/// Relative transmission risk left after protective behaviour.
pub fn behavior_risk_multiplier(
    protect_normal: f64,
    protect_epidemic: f64,
    guidance: f64,
    distancing_factor: f64,
) -> f64 {
    1.0 - effective_protection(protect_normal, protect_epidemic, guidance)
        * (1.0 - distancing_factor)
}

/// New infections per day.
pub fn infection_flow(
    carriers: f64,
    susceptible_ratio: f64,
    temperature: f64,
    flow_mult: f64,
    behavior_mult: f64,
    params: &DiseaseParams,
) -> f64 {
    params.reproduction_rate_daily
        * params.transmission_scale
        * temperature
        * susceptible_ratio
        * flow_mult
        * behavior_mult
        * carriers
}
