//! Prosumer domain model: parameters, schedules, battery and thermal
//! dynamics, cost evaluation and constraint checking.
//!
//! All energy quantities are per-slot energies. Positive `trade` means the
//! prosumer buys from peers; `net = grid - feedin` is the draw on the feeder
//! excluding trades.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Default absolute feasibility tolerance.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: usize,
    pub slot_hours: f64,
}

impl TimeGrid {
    pub fn new(horizon: usize, slot_hours: f64) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::Invalid(
                "horizon must be at least one slot".into(),
            ));
        }
        if !(slot_hours > 0.0 && slot_hours.is_finite()) {
            return Err(ModelError::Invalid("slot duration must be positive".into()));
        }
        Ok(Self {
            horizon,
            slot_hours,
        })
    }

    /// 24 hourly slots.
    pub fn day_ahead() -> Self {
        Self {
            horizon: 24,
            slot_hours: 1.0,
        }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::day_ahead()
    }
}

/// Discretization of the indoor temperature recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalForm {
    /// `T[t] = T[t-1] + (T_out[t] - T[t-1] + η·R·p[t]) / (C·R)`
    #[default]
    Standard,
    /// `T[t] = T[t-1] + (T[t-1] - T_out[t] + η·R·p[t]) / (C·R)`; unstable
    /// without HVAC, kept for comparison studies.
    AsPrinted,
}

impl ThermalForm {
    /// Coefficients `(a, b, c)` with `T[t] = a·T[t-1] + b·p[t] + c·T_out[t]`.
    pub fn coefficients(self, capacitance: f64, resistance: f64, eta: f64) -> (f64, f64, f64) {
        let cr = capacitance * resistance;
        let b = eta / capacitance;
        match self {
            ThermalForm::Standard => (1.0 - 1.0 / cr, b, 1.0 / cr),
            ThermalForm::AsPrinted => (1.0 + 1.0 / cr, b, -1.0 / cr),
        }
    }
}

fn default_true() -> bool {
    true
}

/// Static physical and economic parameters of one prosumer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsumerParams {
    pub id: usize,
    pub solar_cap: Vec<f64>,
    pub line_cap: Vec<f64>,
    pub batt_capacity: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub charge_cap: Vec<f64>,
    pub discharge_cap: Vec<f64>,
    pub eff_charge: f64,
    pub eff_discharge: f64,
    pub batt_init: f64,
    /// Require the final battery level to return to `batt_init`.
    #[serde(default = "default_true")]
    pub cyclic_battery: bool,
    pub hvac_capacitance: f64,
    pub hvac_resistance: f64,
    /// Signed working-mode efficiency; negative values cool.
    pub hvac_eta: f64,
    #[serde(default)]
    pub thermal_form: ThermalForm,
    pub temp_min: Vec<f64>,
    pub temp_max: Vec<f64>,
    pub temp_ref: Vec<f64>,
    pub temp_init: f64,
    pub trade_min: Vec<f64>,
    pub trade_max: Vec<f64>,
    pub base_load: Vec<f64>,
    pub outdoor_temp: Vec<f64>,
    pub reactive_load: Vec<f64>,
    pub energy_rate: f64,
    pub peak_rate: f64,
    pub feedin_rate: f64,
    pub degradation_coeff: f64,
    pub discomfort_coeff: f64,
}

impl ProsumerParams {
    pub fn horizon(&self) -> usize {
        self.base_load.len()
    }

    pub fn batt_min(&self) -> f64 {
        self.soc_min * self.batt_capacity
    }

    pub fn batt_max(&self) -> f64 {
        self.soc_max * self.batt_capacity
    }

    pub fn thermal_coefficients(&self) -> (f64, f64, f64) {
        self.thermal_form
            .coefficients(self.hvac_capacitance, self.hvac_resistance, self.hvac_eta)
    }

    fn vectors(&self) -> [(&'static str, &[f64]); 12] {
        [
            ("solar_cap", &self.solar_cap),
            ("line_cap", &self.line_cap),
            ("charge_cap", &self.charge_cap),
            ("discharge_cap", &self.discharge_cap),
            ("temp_min", &self.temp_min),
            ("temp_max", &self.temp_max),
            ("temp_ref", &self.temp_ref),
            ("trade_min", &self.trade_min),
            ("trade_max", &self.trade_max),
            ("base_load", &self.base_load),
            ("outdoor_temp", &self.outdoor_temp),
            ("reactive_load", &self.reactive_load),
        ]
    }

    /// Checks lengths against `horizon` and every parameter invariant.
    pub fn validate(&self, horizon: usize) -> Result<(), ModelError> {
        let invalid =
            |msg: String| Err(ModelError::Invalid(format!("prosumer {}: {msg}", self.id)));
        for (field, v) in self.vectors() {
            if v.len() != horizon {
                return Err(ModelError::Dimension {
                    field,
                    expected: horizon,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return invalid(format!("{field} has non-finite entries"));
            }
        }
        let scalars = [
            self.batt_capacity,
            self.soc_min,
            self.soc_max,
            self.eff_charge,
            self.eff_discharge,
            self.batt_init,
            self.hvac_capacitance,
            self.hvac_resistance,
            self.hvac_eta,
            self.temp_init,
            self.energy_rate,
            self.peak_rate,
            self.feedin_rate,
            self.degradation_coeff,
            self.discomfort_coeff,
        ];
        if scalars.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite scalar parameter".into());
        }
        if !(0.0 <= self.soc_min && self.soc_min <= self.soc_max && self.soc_max <= 1.0) {
            return invalid(format!(
                "state-of-charge bounds [{}, {}] outside [0, 1]",
                self.soc_min, self.soc_max
            ));
        }
        if self.batt_capacity < 0.0 {
            return invalid("battery capacity must be nonnegative".into());
        }
        let tol = 1e-12 * (1.0 + self.batt_capacity);
        if self.batt_init < self.batt_min() - tol || self.batt_init > self.batt_max() + tol {
            return invalid(format!(
                "initial battery level {} outside [{}, {}]",
                self.batt_init,
                self.batt_min(),
                self.batt_max()
            ));
        }
        if !(self.eff_charge > 0.0
            && self.eff_charge <= 1.0
            && self.eff_discharge > 0.0
            && self.eff_discharge <= 1.0)
        {
            return invalid("efficiencies must lie in (0, 1]".into());
        }
        if !(self.hvac_capacitance > 0.0 && self.hvac_resistance > 0.0) {
            return invalid("thermal capacitance and resistance must be positive".into());
        }
        if self.hvac_eta == 0.0 {
            return invalid("HVAC efficiency must be nonzero".into());
        }
        for t in 0..horizon {
            if !(self.temp_min[t] <= self.temp_ref[t] && self.temp_ref[t] <= self.temp_max[t]) {
                return invalid(format!(
                    "slot {t}: reference temperature outside comfort band"
                ));
            }
            if !(self.trade_min[t] <= 0.0 && 0.0 <= self.trade_max[t]) {
                return invalid(format!("slot {t}: trade caps must bracket zero"));
            }
            for (field, v) in [
                ("solar_cap", &self.solar_cap),
                ("line_cap", &self.line_cap),
                ("charge_cap", &self.charge_cap),
                ("discharge_cap", &self.discharge_cap),
                ("base_load", &self.base_load),
            ] {
                if v[t] < 0.0 {
                    return invalid(format!("slot {t}: {field} is negative"));
                }
            }
        }
        Ok(())
    }
}

/// One prosumer's schedule over the horizon, including the derived battery
/// level and indoor temperature trajectories.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScheduleDecision {
    pub grid: Vec<f64>,
    pub solar: Vec<f64>,
    pub feedin: Vec<f64>,
    pub hvac: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub trade: Vec<f64>,
    pub net: Vec<f64>,
    pub battery: Vec<f64>,
    pub indoor_temp: Vec<f64>,
}

impl ScheduleDecision {
    /// All-zero schedule whose derived trajectories follow the dynamics.
    pub fn idle(params: &ProsumerParams) -> Self {
        let h = params.horizon();
        let zeros = vec![0.0; h];
        Self {
            grid: zeros.clone(),
            solar: zeros.clone(),
            feedin: zeros.clone(),
            hvac: zeros.clone(),
            charge: zeros.clone(),
            discharge: zeros.clone(),
            trade: zeros.clone(),
            net: zeros.clone(),
            battery: vec![params.batt_init; h],
            indoor_temp: simulate_temperature(&zeros, params).expect("lengths match"),
        }
    }

    pub fn horizon(&self) -> usize {
        self.grid.len()
    }

    fn fields(&self) -> [(&'static str, &Vec<f64>); 10] {
        [
            ("grid", &self.grid),
            ("solar", &self.solar),
            ("feedin", &self.feedin),
            ("hvac", &self.hvac),
            ("charge", &self.charge),
            ("discharge", &self.discharge),
            ("trade", &self.trade),
            ("net", &self.net),
            ("battery", &self.battery),
            ("indoor_temp", &self.indoor_temp),
        ]
    }

    fn fields_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.grid,
            &mut self.solar,
            &mut self.feedin,
            &mut self.hvac,
            &mut self.charge,
            &mut self.discharge,
            &mut self.trade,
            &mut self.net,
            &mut self.battery,
            &mut self.indoor_temp,
        ]
    }

    pub fn check_dimensions(&self, horizon: usize) -> Result<(), ModelError> {
        for (field, v) in self.fields() {
            if v.len() != horizon {
                return Err(ModelError::Dimension {
                    field,
                    expected: horizon,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// `w·self + (1-w)·other`, fieldwise.
    pub fn blend(&self, other: &Self, w: f64) -> Self {
        let mut out = self.clone();
        let theirs = other.fields();
        for (mine, (_, o)) in out.fields_mut().into_iter().zip(theirs) {
            for (a, b) in mine.iter_mut().zip(o.iter()) {
                *a = w * *a + (1.0 - w) * b;
            }
        }
        out
    }
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), ModelError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(ModelError::Dimension {
            field,
            expected,
            got: v.len(),
        })
    }
}

/// Battery level after each slot, starting from `batt_init`.
pub fn simulate_battery(
    charge: &[f64],
    discharge: &[f64],
    params: &ProsumerParams,
) -> Result<Vec<f64>, ModelError> {
    let h = params.horizon();
    check_len("charge", charge, h)?;
    check_len("discharge", discharge, h)?;
    let mut level = params.batt_init;
    Ok(charge
        .iter()
        .zip(discharge)
        .map(|(&c, &d)| {
            level += params.eff_charge * c - d / params.eff_discharge;
            level
        })
        .collect())
}

/// Indoor temperature after each slot, starting from `temp_init`.
pub fn simulate_temperature(hvac: &[f64], params: &ProsumerParams) -> Result<Vec<f64>, ModelError> {
    let h = params.horizon();
    check_len("hvac", hvac, h)?;
    let (a, b, c) = params.thermal_coefficients();
    let mut temp = params.temp_init;
    Ok(hvac
        .iter()
        .zip(&params.outdoor_temp)
        .map(|(&p, &out)| {
            temp = a * temp + b * p + c * out;
            temp
        })
        .collect())
}

/// Scheduling cost: energy charge, peak charge, battery degradation and
/// thermal discomfort, minus feed-in revenue.
pub fn evaluate_schedule_cost(d: &ScheduleDecision, params: &ProsumerParams) -> f64 {
    let energy: f64 = d.grid.iter().sum();
    let peak = d
        .grid
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let degradation: f64 = d.discharge.iter().map(|v| v * v).sum();
    let discomfort: f64 = d
        .indoor_temp
        .iter()
        .zip(&params.temp_ref)
        .map(|(t, r)| (t - r).abs())
        .sum();
    let feedin: f64 = d.feedin.iter().sum();
    params.energy_rate * energy
        + params.peak_rate * peak
        + params.degradation_coeff * degradation
        + params.discomfort_coeff * discomfort
        - params.feedin_rate * feedin
}

/// Settlement `πᵀ·trade`; negative when the prosumer is a net seller.
pub fn evaluate_trading_cost(trade: &[f64], prices: &[f64]) -> Result<f64, ModelError> {
    check_len("trade prices", prices, trade.len())?;
    Ok(trade.iter().zip(prices).map(|(p, pi)| p * pi).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintId {
    SolarNonnegative,
    FeedinNonnegative,
    SolarCap,
    GridBounds,
    BatteryDynamics,
    BatteryLevel,
    BatteryTerminal,
    ChargeBounds,
    DischargeBounds,
    HvacNonnegative,
    ThermalDynamics,
    ComfortBand,
    TradeBounds,
    EnergyBalance,
    NetLoadDefinition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub slot: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }

    pub fn contains(&self, constraint: ConstraintId) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }
}

struct Checker {
    tol: f64,
    report: ViolationReport,
}

impl Checker {
    fn below(&mut self, constraint: ConstraintId, slot: usize, value: f64, upper: f64) {
        let excess = value - upper;
        if excess > self.tol {
            self.report.violations.push(Violation {
                constraint,
                slot,
                magnitude: excess,
            });
        }
    }

    fn above(&mut self, constraint: ConstraintId, slot: usize, value: f64, lower: f64) {
        self.below(constraint, slot, lower, value);
    }

    fn within(
        &mut self,
        constraint: ConstraintId,
        slot: usize,
        value: f64,
        lower: f64,
        upper: f64,
    ) {
        let excess = (lower - value).max(value - upper);
        if excess > self.tol {
            self.report.violations.push(Violation {
                constraint,
                slot,
                magnitude: excess,
            });
        }
    }

    fn equal(&mut self, constraint: ConstraintId, slot: usize, lhs: f64, rhs: f64) {
        self.within(constraint, slot, lhs, rhs, rhs);
    }
}

/// Lists every prosumer-level constraint violated by more than `tol`.
pub fn check_feasibility(
    d: &ScheduleDecision,
    params: &ProsumerParams,
    tol: f64,
) -> Result<ViolationReport, ModelError> {
    let h = params.horizon();
    d.check_dimensions(h)?;
    let mut c = Checker {
        tol,
        report: ViolationReport::default(),
    };
    let battery = simulate_battery(&d.charge, &d.discharge, params)?;
    let temps = simulate_temperature(&d.hvac, params)?;
    use ConstraintId::*;
    for t in 0..h {
        c.above(SolarNonnegative, t, d.solar[t], 0.0);
        c.above(FeedinNonnegative, t, d.feedin[t], 0.0);
        c.below(SolarCap, t, d.solar[t] + d.feedin[t], params.solar_cap[t]);
        c.within(GridBounds, t, d.grid[t], 0.0, params.line_cap[t]);
        c.equal(BatteryDynamics, t, d.battery[t], battery[t]);
        c.within(
            BatteryLevel,
            t,
            battery[t],
            params.batt_min(),
            params.batt_max(),
        );
        c.within(ChargeBounds, t, d.charge[t], 0.0, params.charge_cap[t]);
        c.within(
            DischargeBounds,
            t,
            d.discharge[t],
            0.0,
            params.discharge_cap[t],
        );
        c.above(HvacNonnegative, t, d.hvac[t], 0.0);
        c.equal(ThermalDynamics, t, d.indoor_temp[t], temps[t]);
        c.within(
            ComfortBand,
            t,
            temps[t],
            params.temp_min[t],
            params.temp_max[t],
        );
        c.within(
            TradeBounds,
            t,
            d.trade[t],
            params.trade_min[t],
            params.trade_max[t],
        );
        let supply = d.solar[t] + d.grid[t] + d.discharge[t] + d.trade[t];
        let demand = d.charge[t] + d.hvac[t] + params.base_load[t];
        c.equal(EnergyBalance, t, supply, demand);
        c.equal(NetLoadDefinition, t, d.net[t], d.grid[t] - d.feedin[t]);
    }
    if params.cyclic_battery && h > 0 {
        c.equal(BatteryTerminal, h - 1, battery[h - 1], params.batt_init);
    }
    Ok(c.report)
}


#[cfg(test)]
mod tests {
    use super::fixtures::params;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn idle_battery_holds_level() {
        let p = params(4);
        let traj = simulate_battery(&[0.0; 4], &[0.0; 4], &p).unwrap();
        assert_eq!(traj, vec![5.0; 4]);
    }

    #[test]
    fn charging_applies_efficiency() {
        let mut p = params(1);
        p.batt_init = 0.0;
        assert_eq!(simulate_battery(&[1.0], &[0.0], &p).unwrap(), vec![0.9]);
    }

    #[test]
    fn discharging_divides_by_efficiency() {
        let mut p = params(1);
        p.batt_init = 2.0;
        let traj = simulate_battery(&[0.0], &[0.9], &p).unwrap();
        assert!((traj[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn battery_length_mismatch() {
        let p = params(3);
        let err = simulate_battery(&[0.0; 2], &[0.0; 3], &p).unwrap_err();
        assert!(matches!(
            err,
            ModelError::Dimension {
                field: "charge",
                ..
            }
        ));
    }

    #[test]
    fn thermal_equilibrium_without_hvac() {
        let p = params(6);
        assert_eq!(simulate_temperature(&[0.0; 6], &p).unwrap(), vec![24.0; 6]);
    }

    #[test]
    fn one_step_relaxation_toward_outdoor() {
        let mut p = params(1);
        p.temp_init = 20.0;
        p.outdoor_temp = vec![30.0];
        let t = simulate_temperature(&[0.0], &p).unwrap();
        assert!((t[0] - (20.0 + 10.0 / 4.455)).abs() < 1e-12);
        assert!((t[0] - 22.244_668_911_335_58).abs() < 1e-12);
    }

    #[test]
    fn steady_hold_power() {
        let mut p = params(3);
        p.temp_init = 24.0;
        p.outdoor_temp = vec![30.0; 3];
        // η·R·p = T_in - T_out
        let hold = (24.0 - 30.0) / (p.hvac_eta * p.hvac_resistance);
        assert!(hold > 0.0);
        let t = simulate_temperature(&[hold; 3], &p).unwrap();
        for v in t {
            assert!((v - 24.0).abs() < 1e-12);
        }
    }

    #[test]
    fn printed_form_diverges_from_equilibrium() {
        let mut p = params(4);
        p.thermal_form = ThermalForm::AsPrinted;
        p.temp_init = 25.0;
        let t = simulate_temperature(&[0.0; 4], &p).unwrap();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_schedule_costs_nothing() {
        let p = params(3);
        let d = ScheduleDecision::idle(&p);
        assert_eq!(evaluate_schedule_cost(&d, &p), 0.0);
    }

    #[test]
    fn two_part_tariff() {
        let p = params(3);
        let mut d = ScheduleDecision::idle(&p);
        d.grid = vec![1.0, 2.0, 1.0];
        assert!((evaluate_schedule_cost(&d, &p) - 3.2).abs() < 1e-12);
    }

    #[test]
    fn quadratic_degradation() {
        let p = params(1);
        let mut d = ScheduleDecision::idle(&p);
        d.discharge = vec![1.0];
        assert!((evaluate_schedule_cost(&d, &p) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn trading_settlement() {
        assert_eq!(
            evaluate_trading_cost(&[0.0, 0.0], &[0.1, 0.2]).unwrap(),
            0.0
        );
        assert!((evaluate_trading_cost(&[-2.0], &[0.3]).unwrap() + 0.6).abs() < 1e-15);
        assert!((evaluate_trading_cost(&[1.0, -1.0], &[0.1, 0.2]).unwrap() + 0.1).abs() < 1e-15);
        assert!(evaluate_trading_cost(&[1.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn idle_schedule_is_feasible() {
        let p = params(5);
        let report = check_feasibility(&ScheduleDecision::idle(&p), &p, DEFAULT_FEAS_TOL).unwrap();
        assert!(report.is_feasible(), "{report:?}");
    }

    #[test]
    fn solar_overuse_is_reported() {
        let mut p = params(3);
        p.solar_cap = vec![1.0; 3];
        p.base_load = vec![0.0, 2.0, 0.0];
        let mut d = ScheduleDecision::idle(&p);
        d.solar[1] = 2.0;
        let report = check_feasibility(&d, &p, DEFAULT_FEAS_TOL).unwrap();
        let v = report
            .violations
            .iter()
            .find(|v| v.constraint == ConstraintId::SolarCap)
            .expect("solar cap violation");
        assert_eq!(v.slot, 1);
        assert!((v.magnitude - 1.0).abs() < 1e-12);
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let mut p = params(2);
        assert!(p.validate(2).is_ok());
        assert!(matches!(p.validate(3), Err(ModelError::Dimension { .. })));
        p.batt_init = 9.5;
        assert!(p.validate(2).is_err());
        let mut p = params(2);
        p.trade_min[1] = 0.5;
        assert!(p.validate(2).is_err());
        let mut p = params(2);
        p.hvac_eta = 0.0;
        assert!(p.validate(2).is_err());
    }

    fn random_schedule(p: &ProsumerParams, v: &[f64]) -> ScheduleDecision {
        let h = p.horizon();
        let take = |k: usize| v[k * h..(k + 1) * h].to_vec();
        let mut d = ScheduleDecision {
            grid: take(0),
            solar: take(1),
            feedin: take(2),
            hvac: take(3),
            charge: take(4),
            discharge: take(5),
            trade: take(6),
            net: vec![0.0; h],
            battery: vec![0.0; h],
            indoor_temp: vec![0.0; h],
        };
        d.net = d.grid.iter().zip(&d.feedin).map(|(g, f)| g - f).collect();
        d.battery = simulate_battery(&d.charge, &d.discharge, p).unwrap();
        d.indoor_temp = simulate_temperature(&d.hvac, p).unwrap();
        d
    }

    proptest! {
        #[test]
        fn battery_is_affine(a in prop::collection::vec(0.0..2.0f64, 12), b in prop::collection::vec(0.0..2.0f64, 12), c in prop::collection::vec(0.0..2.0f64, 12)) {
            let p = params(6);
            let sum = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| u + v).collect() };
            let base = simulate_battery(&a[..6], &a[6..], &p).unwrap();
            let shifted = simulate_battery(&sum(&a[..6], &b[..6]), &sum(&a[6..], &b[6..]), &p).unwrap();
            let base2 = simulate_battery(&c[..6], &c[6..], &p).unwrap();
            let shifted2 = simulate_battery(&sum(&c[..6], &b[..6]), &sum(&c[6..], &b[6..]), &p).unwrap();
            for t in 0..6 {
                prop_assert!(((shifted[t] - base[t]) - (shifted2[t] - base2[t])).abs() < 1e-12);
            }
        }

        #[test]
        fn temperature_sensitivity_matches_closed_form(hvac in prop::collection::vec(0.0..3.0f64, 8), slot in 0usize..8) {
            let mut p = params(8);
            p.outdoor_temp = (0..8).map(|t| 25.0 + t as f64).collect();
            let base = simulate_temperature(&hvac, &p).unwrap();
            let mut bumped = hvac.clone();
            let step = 1e-3;
            bumped[slot] += step;
            let moved = simulate_temperature(&bumped, &p).unwrap();
            let (cap, res, eta) = (p.hvac_capacitance, p.hvac_resistance, p.hvac_eta);
            for t in 0..8 {
                let fd = (moved[t] - base[t]) / step;
                let exact = if t < slot { 0.0 } else {
                    eta * res / (cap * res) * (1.0 - 1.0 / (cap * res)).powi((t - slot) as i32)
                };
                prop_assert!((fd - exact).abs() < 1e-9, "t={} fd={} exact={}", t, fd, exact);
            }
        }

        #[test]
        fn schedule_cost_is_convex(v1 in prop::collection::vec(0.0..3.0f64, 28), v2 in prop::collection::vec(0.0..3.0f64, 28), w in 0.0..=1.0f64) {
            let p = params(4);
            let d1 = random_schedule(&p, &v1);
            let d2 = random_schedule(&p, &v2);
            let mix = d1.blend(&d2, w);
            let lhs = evaluate_schedule_cost(&mix, &p);
            let rhs = w * evaluate_schedule_cost(&d1, &p) + (1.0 - w) * evaluate_schedule_cost(&d2, &p);
            prop_assert!(lhs <= rhs + 1e-9);
        }

        #[test]
        fn feasible_report_implies_simulated_bounds(v in prop::collection::vec(0.0..1.0f64, 28)) {
            let mut p = params(4);
            p.solar_cap = vec![3.0; 4];
            p.cyclic_battery = false;
            let mut d = random_schedule(&p, &v);
            // close the balance with the grid so only physical bounds remain in play
            for t in 0..4 {
                d.feedin[t] = d.feedin[t].min(p.solar_cap[t] - d.solar[t]).max(0.0);
                let gap = d.charge[t] + d.hvac[t] + p.base_load[t] - d.solar[t] - d.discharge[t] - d.trade[t];
                d.grid[t] = gap;
                d.net[t] = d.grid[t] - d.feedin[t];
            }
            let report = check_feasibility(&d, &p, DEFAULT_FEAS_TOL).unwrap();
            if report.is_feasible() {
                let b = simulate_battery(&d.charge, &d.discharge, &p).unwrap();
                let temps = simulate_temperature(&d.hvac, &p).unwrap();
                for t in 0..4 {
                    prop_assert!(b[t] >= p.batt_min() - 1e-6 && b[t] <= p.batt_max() + 1e-6);
                    prop_assert!(temps[t] >= p.temp_min[t] - 1e-6 && temps[t] <= p.temp_max[t] + 1e-6);
                    prop_assert!((d.battery[t] - b[t]).abs() <= 1e-6);
                }
            } else {
                prop_assert!(report.worst().unwrap().magnitude > DEFAULT_FEAS_TOL);
            }
        }
    }
}
