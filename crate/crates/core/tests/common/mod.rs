#![allow(dead_code)]

use std::path::PathBuf;

use peergrid_core::coordinator::RunConfig;
use peergrid_core::scenario::load_scenario;
use peergrid_core::{
    NetworkModel, ProsumerParams, Scenario, ScheduleDecision, ThermalForm, TimeGrid,
};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn bundled(name: &str) -> Scenario {
    let path = scenarios_dir().join(format!("{name}.toml"));
    load_scenario(&path, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A prosumer with flat profiles, no load, no solar and outdoor air at the
/// comfort reference.
pub fn prosumer(id: usize, h: usize) -> ProsumerParams {
    ProsumerParams {
        id,
        solar_cap: vec![0.0; h],
        line_cap: vec![10.0; h],
        batt_capacity: 10.0,
        soc_min: 0.1,
        soc_max: 0.9,
        charge_cap: vec![2.5; h],
        discharge_cap: vec![2.5; h],
        eff_charge: 0.9,
        eff_discharge: 0.9,
        batt_init: 5.0,
        cyclic_battery: true,
        hvac_capacitance: 3.3,
        hvac_resistance: 1.35,
        hvac_eta: -2.5,
        thermal_form: ThermalForm::Standard,
        temp_min: vec![15.0; h],
        temp_max: vec![32.0; h],
        temp_ref: vec![24.0; h],
        temp_init: 24.0,
        trade_min: vec![-3.0; h],
        trade_max: vec![3.0; h],
        base_load: vec![0.0; h],
        outdoor_temp: vec![24.0; h],
        reactive_load: vec![0.0; h],
        energy_rate: 0.2,
        peak_rate: 1.2,
        feedin_rate: 0.05,
        degradation_coeff: 0.01,
        discomfort_coeff: 0.25,
    }
}

pub fn scenario(prosumers: Vec<ProsumerParams>, price: f64) -> Scenario {
    let h = prosumers[0].horizon();
    let n = prosumers.len();
    Scenario {
        grid: TimeGrid::new(h, 1.0).unwrap(),
        network: NetworkModel::uniform(n, 1e-3, 5e-4, 100.0, 100.0, h),
        prices: vec![price; h],
        prosumers,
        run: RunConfig::default(),
    }
}

/// Largest per-slot |Σ_i p_trade|.
pub fn trade_imbalance(decisions: &[ScheduleDecision]) -> f64 {
    let h = decisions[0].horizon();
    (0..h)
        .map(|t| decisions.iter().map(|d| d.trade[t]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}
