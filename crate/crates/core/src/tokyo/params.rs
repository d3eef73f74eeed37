use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::scenario::{date_to_day, ymd};
use super::TokyoError;
use crate::engine::Schedule;

/// Schedule anchored to calendar dates rather than day indices, so it can be
/// placed on any simulation start date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatedSchedule {
    pub initial: f64,
    pub changes: Vec<(NaiveDate, f64)>,
}

impl DatedSchedule {
    pub fn new(initial: f64, changes: Vec<(NaiveDate, f64)>) -> Self {
        DatedSchedule { initial, changes }
    }

    /// Changes dated on or before `start` fold into the initial value.
    pub fn to_schedule(&self, start: NaiveDate) -> Result<Schedule, TokyoError> {
        let mut default = self.initial;
        let mut bps = Vec::new();
        for &(date, value) in &self.changes {
            if date <= start {
                default = value;
            } else {
                bps.push((date_to_day(date, start)?, value));
            }
        }
        Ok(Schedule::new(default, bps)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierWeights {
    pub infected: f64,
    pub inapparent: f64,
    pub apparent: f64,
    pub not_tested: f64,
    pub confirmed: f64,
}

impl Default for CarrierWeights {
    fn default() -> Self {
        CarrierWeights {
            infected: 1.0,
            inapparent: 1.0,
            // symptomatic but not yet tested: still circulating
            apparent: 1.0,
            not_tested: 0.0,
            confirmed: 0.0,
        }
    }
}

/// Initial values of the infected compartments (persons, 01 Mar 2020).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCases {
    pub infected: f64,
    pub apparent: f64,
    pub inapparent: f64,
    pub confirmed: f64,
    pub not_tested: f64,
}

impl Default for InitialCases {
    fn default() -> Self {
        InitialCases {
            infected: 149.0,
            apparent: 60.0,
            inapparent: 664.0,
            confirmed: 5.0,
            not_tested: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseParams {
    pub total_population: f64,
    /// Secondary cases per carrier per day.
    pub reproduction_rate_daily: f64,
    /// Per-occasion reproduction number the daily rate was derived from.
    /// Informational; the model reads `reproduction_rate_daily`.
    pub r0_per_occasion: f64,
    pub apparent_ratio: f64,
    pub incubation_days: f64,
    pub inapparent_clearance_days: f64,
    pub symptomatic_resolution_days: f64,
    pub confirmation_delay_days: f64,
    pub hospitalisation_delay_days: f64,
    pub testing_policy: DatedSchedule,
    pub temperature_effect: DatedSchedule,
    pub transmission_scale: f64,
    pub carrier_weights: CarrierWeights,
    pub initial: InitialCases,
}

impl Default for DiseaseParams {
    fn default() -> Self {
        DiseaseParams {
            total_population: 1.40e7,
            reproduction_rate_daily: 0.207,
            r0_per_occasion: 2.9,
            apparent_ratio: 0.375,
            incubation_days: 5.0,
            inapparent_clearance_days: 8.0,
            symptomatic_resolution_days: 8.0,
            confirmation_delay_days: 2.0,
            hospitalisation_delay_days: 1.0,
            testing_policy: DatedSchedule::new(0.5, vec![(ymd(2020, 5, 10), 1.0)]),
            // no August entry: 1.1 holds from mid-July to mid-September
            temperature_effect: DatedSchedule::new(
                1.0,
                vec![
                    (ymd(2020, 5, 15), 1.2),
                    (ymd(2020, 6, 15), 1.6),
                    (ymd(2020, 7, 15), 1.1),
                    (ymd(2020, 9, 15), 1.6),
                ],
            ),
            transmission_scale: 1.0,
            carrier_weights: CarrierWeights::default(),
            initial: InitialCases::default(),
        }
    }
}

/// Reduction of maximum people flow per active input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCoefficients {
    pub school_closure: f64,
    pub stay_at_home: f64,
    pub short_term: f64,
    pub new_normal: f64,
}

impl Default for FlowCoefficients {
    fn default() -> Self {
        FlowCoefficients {
            school_closure: 0.2,
            stay_at_home: 0.1,
            short_term: 0.1,
            new_normal: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityBehaviorParams {
    /// Persons per hour at a representative traffic node.
    pub baseline_people_flow: f64,
    pub flow_coefficients: FlowCoefficients,
    pub distancing_factor: f64,
    pub protect_prob_epidemic: f64,
    pub protect_prob_normal: f64,
    pub behaviour_guidance: DatedSchedule,
}

impl Default for MobilityBehaviorParams {
    fn default() -> Self {
        MobilityBehaviorParams {
            baseline_people_flow: 250_000.0,
            flow_coefficients: FlowCoefficients::default(),
            distancing_factor: 0.5,
            protect_prob_epidemic: 0.6,
            protect_prob_normal: 0.3,
            behaviour_guidance: DatedSchedule::new(0.0, vec![(ymd(2020, 4, 15), 1.0)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitCoefficients {
    pub school_closure: f64,
    pub stay_at_home: f64,
    pub mid_term: f64,
    pub focused: f64,
    pub long_term: f64,
}

impl Default for VisitCoefficients {
    fn default() -> Self {
        VisitCoefficients {
            school_closure: 0.2,
            stay_at_home: 0.1,
            mid_term: 0.1,
            focused: 0.1,
            long_term: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwomCoefficients {
    pub school_closure: f64,
    pub long_term: f64,
    pub stay_at_home: f64,
    pub focused: f64,
    pub mid_term: f64,
}

impl Default for EwomCoefficients {
    fn default() -> Self {
        EwomCoefficients {
            school_closure: 0.2,
            long_term: 0.2,
            stay_at_home: 0.1,
            focused: 0.1,
            mid_term: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestaurantParams {
    /// Residents aged 15 to 74.
    pub customer_population: f64,
    /// Persons per day dining out with no intervention. `None` means 10% of
    /// `customer_population`; reported visit series are normalised by it.
    pub baseline_dining_out: Option<f64>,
    pub dining_return_days: f64,
    pub visit_coefficients: VisitCoefficients,
    pub ewom_coefficients: EwomCoefficients,
}

impl Default for RestaurantParams {
    fn default() -> Self {
        RestaurantParams {
            customer_population: 1.07e7,
            baseline_dining_out: None,
            dining_return_days: 1.0,
            visit_coefficients: VisitCoefficients::default(),
            ewom_coefficients: EwomCoefficients::default(),
        }
    }
}

impl RestaurantParams {
    pub fn baseline_dining_out(&self) -> f64 {
        self.baseline_dining_out
            .unwrap_or(0.1 * self.customer_population)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub disease: DiseaseParams,
    pub mobility: MobilityBehaviorParams,
    pub restaurant: RestaurantParams,
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), TokyoError> {
    if ok {
        Ok(())
    } else {
        Err(TokyoError::Param(what()))
    }
}

fn unit_interval(name: &str, v: f64) -> Result<(), TokyoError> {
    check((0.0..=1.0).contains(&v), || {
        format!("{name} must be in [0, 1], got {v}")
    })
}

fn positive(name: &str, v: f64) -> Result<(), TokyoError> {
    check(v > 0.0 && v.is_finite(), || {
        format!("{name} must be positive, got {v}")
    })
}

fn non_negative(name: &str, v: f64) -> Result<(), TokyoError> {
    check(v >= 0.0 && v.is_finite(), || {
        format!("{name} must be non-negative, got {v}")
    })
}

fn coefficient_sum(name: &str, coeffs: &[f64]) -> Result<(), TokyoError> {
    for &c in coeffs {
        unit_interval(name, c)?;
    }
    let sum: f64 = coeffs.iter().sum();
    check(sum <= 1.0 + 1e-12, || {
        format!("{name} sum to {sum}, must not exceed 1")
    })
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), TokyoError> {
        let d = &self.disease;
        positive("disease.total_population", d.total_population)?;
        non_negative("disease.reproduction_rate_daily", d.reproduction_rate_daily)?;
        unit_interval("disease.apparent_ratio", d.apparent_ratio)?;
        positive("disease.incubation_days", d.incubation_days)?;
        positive(
            "disease.inapparent_clearance_days",
            d.inapparent_clearance_days,
        )?;
        positive(
            "disease.symptomatic_resolution_days",
            d.symptomatic_resolution_days,
        )?;
        positive("disease.confirmation_delay_days", d.confirmation_delay_days)?;
        positive(
            "disease.hospitalisation_delay_days",
            d.hospitalisation_delay_days,
        )?;
        positive("disease.transmission_scale", d.transmission_scale)?;
        let w = &d.carrier_weights;
        for (n, v) in [
            ("infected", w.infected),
            ("inapparent", w.inapparent),
            ("apparent", w.apparent),
            ("not_tested", w.not_tested),
            ("confirmed", w.confirmed),
        ] {
            non_negative(&format!("disease.carrier_weights.{n}"), v)?;
        }
        let i = &d.initial;
        for (n, v) in [
            ("infected", i.infected),
            ("apparent", i.apparent),
            ("inapparent", i.inapparent),
            ("confirmed", i.confirmed),
            ("not_tested", i.not_tested),
        ] {
            non_negative(&format!("disease.initial.{n}"), v)?;
        }
        for &(_, v) in &d.testing_policy.changes {
            unit_interval("disease.testing_policy", v)?;
        }
        unit_interval("disease.testing_policy", d.testing_policy.initial)?;

        let m = &self.mobility;
        non_negative("mobility.baseline_people_flow", m.baseline_people_flow)?;
        let fc = &m.flow_coefficients;
        coefficient_sum(
            "mobility.flow_coefficients",
            &[
                fc.school_closure,
                fc.stay_at_home,
                fc.short_term,
                fc.new_normal,
            ],
        )?;
        unit_interval("mobility.distancing_factor", m.distancing_factor)?;
        unit_interval("mobility.protect_prob_epidemic", m.protect_prob_epidemic)?;
        unit_interval("mobility.protect_prob_normal", m.protect_prob_normal)?;

        let r = &self.restaurant;
        non_negative("restaurant.customer_population", r.customer_population)?;
        non_negative("restaurant.baseline_dining_out", r.baseline_dining_out())?;
        positive("restaurant.dining_return_days", r.dining_return_days)?;
        let v = &r.visit_coefficients;
        coefficient_sum(
            "restaurant.visit_coefficients",
            &[
                v.school_closure,
                v.stay_at_home,
                v.mid_term,
                v.focused,
                v.long_term,
            ],
        )?;
        let e = &r.ewom_coefficients;
        coefficient_sum(
            "restaurant.ewom_coefficients",
            &[
                e.school_closure,
                e.long_term,
                e.stay_at_home,
                e.focused,
                e.mid_term,
            ],
        )?;
        Ok(())
    }

    /// Sets one numeric parameter by dotted path, e.g.
    /// `disease.transmission_scale` or `restaurant.visit_coefficients.long_term`.
    pub fn apply_override(&mut self, path: &str, value: f64) -> Result<(), TokyoError> {
        let unknown = || TokyoError::UnknownParam(path.to_string());
        if !value.is_finite() {
            return Err(TokyoError::Param(format!("{path}: value must be finite")));
        }
        let mut tree =
            serde_json::to_value(&*self).map_err(|e| TokyoError::Param(e.to_string()))?;
        let mut slot = &mut tree;
        for part in path.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|o| o.get_mut(part))
                .ok_or_else(unknown)?;
        }
        // numeric leaves only; `baseline_dining_out` may be null
        let settable =
            slot.is_number() || (slot.is_null() && path == "restaurant.baseline_dining_out");
        if !settable {
            return Err(unknown());
        }
        *slot = Value::from(value);
        *self = serde_json::from_value(tree).map_err(|e| TokyoError::Param(e.to_string()))?;
        Ok(())
    }

    pub fn with_overrides<'a>(
        mut self,
        overrides: impl IntoIterator<Item = (&'a String, &'a f64)>,
    ) -> Result<Self, TokyoError> {
        for (k, v) in overrides {
            self.apply_override(k, *v)?;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn daily_rate_consistent_with_turnover() {
        // 2.9 per occasion over a 14-day turnover
        let d = DiseaseParams::default();
        assert!((d.r0_per_occasion / 14.0 - d.reproduction_rate_daily).abs() < 1e-3);
    }

    #[test]
    fn override_nested_and_optional() {
        let mut p = ModelParams::default();
        p.apply_override("disease.transmission_scale", 1.3).unwrap();
        p.apply_override("restaurant.visit_coefficients.long_term", 0.25)
            .unwrap();
        p.apply_override("restaurant.baseline_dining_out", 5000.0)
            .unwrap();
        assert_eq!(p.disease.transmission_scale, 1.3);
        assert_eq!(p.restaurant.visit_coefficients.long_term, 0.25);
        assert_eq!(p.restaurant.baseline_dining_out(), 5000.0);
    }

    #[test]
    fn override_rejects_unknown_and_non_numeric() {
        let mut p = ModelParams::default();
        assert!(matches!(
            p.apply_override("disease.nope", 1.0),
            Err(TokyoError::UnknownParam(_))
        ));
        assert!(matches!(
            p.apply_override("disease.testing_policy", 1.0),
            Err(TokyoError::UnknownParam(_))
        ));
        assert!(matches!(
            p.apply_override("disease", 1.0),
            Err(TokyoError::UnknownParam(_))
        ));
        assert!(p
            .apply_override("disease.apparent_ratio", f64::NAN)
            .is_err());
        assert_eq!(p, ModelParams::default());
    }

    #[test]
    fn invariant_violations() {
        let mut p = ModelParams::default();
        p.disease.apparent_ratio = 1.2;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.disease.transmission_scale = 0.0;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.disease.incubation_days = 0.0;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.mobility.flow_coefficients.new_normal = 0.8;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.restaurant.visit_coefficients.long_term = 0.6;
        assert!(p.validate().is_err());
    }

    #[test]
    fn dated_schedule_folds_changes_at_or_before_start() {
        let s = DatedSchedule::new(0.5, vec![(ymd(2020, 3, 1), 0.7), (ymd(2020, 3, 11), 1.0)]);
        let sched = s.to_schedule(ymd(2020, 3, 1)).unwrap();
        assert_eq!(sched.default_value(), 0.7);
        assert_eq!(sched.breakpoints(), &[(10, 1.0)]);
        let later = s.to_schedule(ymd(2020, 4, 1)).unwrap();
        assert_eq!(later.default_value(), 1.0);
        assert!(later.breakpoints().is_empty());
    }
}
