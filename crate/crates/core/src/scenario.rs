//! Scenario files and synthetic scenario generation.
//!
//! A scenario is a TOML document (schema version 1) with top-level tables
//! `timegrid`, `prosumers`, `network`, `prices` and `run`. Every per-slot
//! quantity is a *profile*, written as one of
//!
//! ```toml
//! base_load = 0.8                      # constant
//! base_load = [0.5, 0.6, ...]          # inline values, one per slot
//! base_load = { file = "load_0.csv" }  # CSV with columns slot,value
//! ```
//!
//! Profile paths are resolved against the profile directory, which defaults
//! to the directory holding the config file. Branch data may be inline
//! (`resistance`, `reactance`) or a CSV with columns `id,r,x`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coordinator::RunConfig;
use crate::error::{CoreError, Result};
use crate::model::{ProsumerParams, ThermalForm, TimeGrid};
use crate::network::NetworkModel;

pub const SCHEMA_VERSION: u32 = 1;

/// RNG stream used by [`generate_synthetic`].
pub const SYNTHESIS_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: TimeGrid,
    pub prosumers: Vec<ProsumerParams>,
    pub network: NetworkModel,
    /// Peer-to-peer trading price per slot.
    pub prices: Vec<f64>,
    pub run: RunConfig,
}

impl Scenario {
    pub fn num_prosumers(&self) -> usize {
        self.prosumers.len()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.grid.horizon;
        TimeGrid::new(h, self.grid.slot_hours)?;
        if self.prosumers.is_empty() {
            return Err(CoreError::Scenario(
                "at least one prosumer is required".into(),
            ));
        }
        for (i, p) in self.prosumers.iter().enumerate() {
            if p.id != i {
                return Err(CoreError::Scenario(format!(
                    "prosumer at position {i} has id {}",
                    p.id
                )));
            }
            p.validate(h)?;
        }
        self.network.validate(self.prosumers.len(), h)?;
        if self.prices.len() != h || self.prices.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Scenario(format!(
                "prices must hold {h} finite values"
            )));
        }
        self.run.validate()
    }

    /// Same scenario with every trading cap set to zero.
    pub fn without_trading(&self) -> Scenario {
        let mut s = self.clone();
        for p in &mut s.prosumers {
            p.trade_min.iter_mut().for_each(|v| *v = 0.0);
            p.trade_max.iter_mut().for_each(|v| *v = 0.0);
        }
        s
    }
}

/// A per-slot input in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Values(Vec<f64>),
    File { file: String },
}

impl Profile {
    fn resolve(&self, field: &str, horizon: usize, dir: &Path) -> Result<Vec<f64>> {
        match self {
            Profile::Constant(v) => Ok(vec![*v; horizon]),
            Profile::Values(v) if v.len() == horizon => Ok(v.clone()),
            Profile::Values(v) => Err(CoreError::Scenario(format!(
                "{field}: {} values given, expected {horizon}",
                v.len()
            ))),
            Profile::File { file } => read_profile(&dir.join(file), horizon),
        }
    }

    fn describe(values: &[f64]) -> Profile {
        match values.first() {
            Some(&first) if values.iter().all(|&v| v == first) => Profile::Constant(first),
            _ => Profile::Values(values.to_vec()),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ProfileRow {
    slot: usize,
    value: f64,
}

/// Reads a `slot,value` CSV holding exactly `horizon` rows in slot order.
pub fn read_profile(path: &Path, horizon: usize) -> Result<Vec<f64>> {
    let file_err = |message: String| CoreError::File {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| file_err(e.to_string()))?;
    let mut values = Vec::with_capacity(horizon);
    for (row, record) in reader.deserialize::<ProfileRow>().enumerate() {
        let record = record.map_err(|e| file_err(format!("row {}: {e}", row + 1)))?;
        if record.slot != row {
            return Err(file_err(format!(
                "row {}: slot {} out of order",
                row + 1,
                record.slot
            )));
        }
        if !record.value.is_finite() {
            return Err(file_err(format!("row {}: non-finite value", row + 1)));
        }
        values.push(record.value);
    }
    if values.len() != horizon {
        return Err(file_err(format!(
            "{} rows, expected {horizon}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn write_profile(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CoreError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    for (slot, &value) in values.iter().enumerate() {
        w.serialize(ProfileRow { slot, value })
            .map_err(|e| CoreError::File {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeGridConfig {
    horizon: usize,
    #[serde(default = "one")]
    slot_hours: f64,
}

fn one() -> f64 {
    1.0
}

/// Per-prosumer entry; omitted fields take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProsumerConfig {
    solar_cap: Option<Profile>,
    base_load: Option<Profile>,
    outdoor_temp: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line_cap: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batt_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    soc_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    soc_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    charge_cap: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discharge_cap: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eff_charge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eff_discharge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batt_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cyclic_battery: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hvac_capacitance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hvac_resistance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hvac_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thermal_form: Option<ThermalForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temp_min: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temp_max: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temp_ref: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temp_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trade_min: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trade_max: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reactive_load: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feedin_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degradation_coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discomfort_coeff: Option<f64>,
}

/// Defaults for omitted prosumer fields.
pub mod defaults {
    pub const LINE_CAP: f64 = 12.0;
    pub const BATT_CAPACITY: f64 = 10.0;
    pub const SOC_MIN: f64 = 0.1;
    pub const SOC_MAX: f64 = 0.9;
    pub const CHARGE_CAP: f64 = 2.5;
    pub const EFFICIENCY: f64 = 0.9;
    pub const HVAC_CAPACITANCE: f64 = 3.3;
    pub const HVAC_RESISTANCE: f64 = 1.35;
    pub const HVAC_ETA: f64 = -2.5;
    pub const TEMP_MIN: f64 = 15.0;
    pub const TEMP_MAX: f64 = 32.0;
    pub const TEMP_REF: f64 = 24.0;
    pub const TRADE_CAP: f64 = 5.0;
    pub const ENERGY_RATE: f64 = 0.2;
    pub const PEAK_RATE: f64 = 1.2;
    pub const FEEDIN_RATE: f64 = 0.05;
    pub const DEGRADATION: f64 = 0.01;
    pub const DISCOMFORT: f64 = 0.25;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    branches_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resistance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reactance: Option<Vec<f64>>,
    p_min: f64,
    p_max: f64,
    q_min: f64,
    q_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    root_voltage: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    voltage_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PricesConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    trade: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    timegrid: TimeGridConfig,
    prosumers: Vec<ProsumerConfig>,
    network: NetworkConfig,
    #[serde(default)]
    prices: PricesConfig,
    #[serde(default)]
    run: RunConfig,
}

#[derive(Debug, Deserialize, Serialize)]
struct BranchRow {
    id: usize,
    r: f64,
    x: f64,
}

fn read_branches(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file_err = |message: String| CoreError::File {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| file_err(e.to_string()))?;
    let (mut r, mut x) = (Vec::new(), Vec::new());
    for (row, rec) in reader.deserialize::<BranchRow>().enumerate() {
        let rec = rec.map_err(|e| file_err(format!("row {}: {e}", row + 1)))?;
        if rec.id != row + 1 {
            return Err(file_err(format!(
                "row {}: branch id {} out of order",
                row + 1,
                rec.id
            )));
        }
        r.push(rec.r);
        x.push(rec.x);
    }
    Ok((r, x))
}

fn build_prosumer(i: usize, c: &ProsumerConfig, h: usize, dir: &Path) -> Result<ProsumerParams> {
    use defaults::*;
    let ctx = |field: &str| format!("prosumers[{i}].{field}");
    let required = |field: &str, p: &Option<Profile>| -> Result<Vec<f64>> {
        match p {
            Some(p) => p.resolve(&ctx(field), h, dir),
            None => Err(CoreError::Scenario(format!(
                "{}: missing required field",
                ctx(field)
            ))),
        }
    };
    let optional = |field: &str, p: &Option<Profile>, default: f64| -> Result<Vec<f64>> {
        match p {
            Some(p) => p.resolve(&ctx(field), h, dir),
            None => Ok(vec![default; h]),
        }
    };
    let batt_capacity = c.batt_capacity.unwrap_or(BATT_CAPACITY);
    let soc_min = c.soc_min.unwrap_or(SOC_MIN);
    let soc_max = c.soc_max.unwrap_or(SOC_MAX);
    let temp_ref = optional("temp_ref", &c.temp_ref, TEMP_REF)?;
    let params = ProsumerParams {
        id: i,
        solar_cap: required("solar_cap", &c.solar_cap)?,
        base_load: required("base_load", &c.base_load)?,
        outdoor_temp: required("outdoor_temp", &c.outdoor_temp)?,
        line_cap: optional("line_cap", &c.line_cap, LINE_CAP)?,
        batt_capacity,
        soc_min,
        soc_max,
        charge_cap: optional("charge_cap", &c.charge_cap, CHARGE_CAP)?,
        discharge_cap: optional("discharge_cap", &c.discharge_cap, CHARGE_CAP)?,
        eff_charge: c.eff_charge.unwrap_or(EFFICIENCY),
        eff_discharge: c.eff_discharge.unwrap_or(EFFICIENCY),
        batt_init: c
            .batt_init
            .unwrap_or(0.5 * (soc_min + soc_max) * batt_capacity),
        cyclic_battery: c.cyclic_battery.unwrap_or(true),
        hvac_capacitance: c.hvac_capacitance.unwrap_or(HVAC_CAPACITANCE),
        hvac_resistance: c.hvac_resistance.unwrap_or(HVAC_RESISTANCE),
        hvac_eta: c.hvac_eta.unwrap_or(HVAC_ETA),
        thermal_form: c.thermal_form.unwrap_or_default(),
        temp_min: optional("temp_min", &c.temp_min, TEMP_MIN)?,
        temp_max: optional("temp_max", &c.temp_max, TEMP_MAX)?,
        temp_init: c.temp_init.unwrap_or(temp_ref[0]),
        temp_ref,
        trade_min: optional("trade_min", &c.trade_min, -TRADE_CAP)?,
        trade_max: optional("trade_max", &c.trade_max, TRADE_CAP)?,
        reactive_load: optional("reactive_load", &c.reactive_load, 0.0)?,
        energy_rate: c.energy_rate.unwrap_or(ENERGY_RATE),
        peak_rate: c.peak_rate.unwrap_or(PEAK_RATE),
        feedin_rate: c.feedin_rate.unwrap_or(FEEDIN_RATE),
        degradation_coeff: c.degradation_coeff.unwrap_or(DEGRADATION),
        discomfort_coeff: c.discomfort_coeff.unwrap_or(DISCOMFORT),
    };
    params
        .validate(h)
        .map_err(|e| CoreError::Scenario(format!("prosumers[{i}]: {e}")))?;
    Ok(params)
}

/// Midway between the feed-in tariff and the energy rate, averaged over
/// prosumers.
pub fn default_trade_price(prosumers: &[ProsumerParams]) -> f64 {
    let n = prosumers.len().max(1) as f64;
    prosumers
        .iter()
        .map(|p| 0.5 * (p.feedin_rate + p.energy_rate))
        .sum::<f64>()
        / n
}

/// Parses a scenario from TOML text. Relative paths resolve against `dir`.
pub fn parse_scenario(text: &str, dir: &Path) -> Result<Scenario> {
    let cfg: ConfigFile = toml::from_str(text).map_err(|e| CoreError::Scenario(e.to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CoreError::Scenario(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    let grid = TimeGrid::new(cfg.timegrid.horizon, cfg.timegrid.slot_hours)?;
    let h = grid.horizon;
    let prosumers = cfg
        .prosumers
        .iter()
        .enumerate()
        .map(|(i, c)| build_prosumer(i, c, h, dir))
        .collect::<Result<Vec<_>>>()?;

    let n = &cfg.network;
    let (resistance, reactance) = match (&n.branches_file, &n.resistance, &n.reactance) {
        (Some(file), None, None) => read_branches(&dir.join(file))?,
        (None, Some(r), Some(x)) => (r.clone(), x.clone()),
        _ => {
            return Err(CoreError::Scenario(
                "network: give either branches_file or both resistance and reactance".into(),
            ))
        }
    };
    let root_voltage = match &n.root_voltage {
        Some(p) => p.resolve("network.root_voltage", h, dir)?,
        None => vec![1.0; h],
    };
    let network = NetworkModel {
        resistance,
        reactance,
        p_min: n.p_min,
        p_max: n.p_max,
        q_min: n.q_min,
        q_max: n.q_max,
        root_voltage,
        voltage_tol: n.voltage_tol.unwrap_or(0.05),
    };
    let prices = match &cfg.prices.trade {
        Some(p) => p.resolve("prices.trade", h, dir)?,
        None => vec![default_trade_price(&prosumers); h],
    };
    let scenario = Scenario {
        grid,
        prosumers,
        network,
        prices,
        run: cfg.run,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Loads and validates a scenario file. Profile paths resolve against
/// `profile_dir`, or the config's directory when none is given.
pub fn load_scenario(config: &Path, profile_dir: Option<&Path>) -> Result<Scenario> {
    let text = fs::read_to_string(config).map_err(|e| CoreError::File {
        path: config.display().to_string(),
        message: e.to_string(),
    })?;
    let dir: PathBuf = match profile_dir {
        Some(d) => d.to_path_buf(),
        None => config.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    parse_scenario(&text, &dir).map_err(|e| match e {
        CoreError::Scenario(m) => CoreError::Scenario(format!("{}: {m}", config.display())),
        other => other,
    })
}

/// Writes `scenario` as a config file plus CSVs in `profiles/<stem>/` next
/// to it, where `<stem>` is the config file name without extension.
/// Non-constant profiles go to CSV, the branch table to `branches.csv`.
pub fn write_scenario(scenario: &Scenario, config: &Path) -> Result<()> {
    let dir = config.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = config.file_stem().and_then(|s| s.to_str()).ok_or_else(|| {
        CoreError::Scenario(format!(
            "{}: config path needs a file name",
            config.display()
        ))
    })?;
    let sub = format!("profiles/{stem}");
    let profile_dir = dir.join(&sub);
    fs::create_dir_all(&profile_dir)?;
    let file_profile = |name: String, values: &[f64]| -> Result<Profile> {
        match Profile::describe(values) {
            Profile::Constant(v) => Ok(Profile::Constant(v)),
            _ => {
                let rel = format!("{sub}/{name}.csv");
                write_profile(&dir.join(&rel), values)?;
                Ok(Profile::File { file: rel })
            }
        }
    };
    let mut prosumers = Vec::with_capacity(scenario.prosumers.len());
    for p in &scenario.prosumers {
        let i = p.id;
        let fp = |field: &str, v: &[f64]| file_profile(format!("p{i:02}_{field}"), v);
        prosumers.push(ProsumerConfig {
            solar_cap: Some(fp("solar_cap", &p.solar_cap)?),
            base_load: Some(fp("base_load", &p.base_load)?),
            outdoor_temp: Some(fp("outdoor_temp", &p.outdoor_temp)?),
            line_cap: Some(fp("line_cap", &p.line_cap)?),
            batt_capacity: Some(p.batt_capacity),
            soc_min: Some(p.soc_min),
            soc_max: Some(p.soc_max),
            charge_cap: Some(fp("charge_cap", &p.charge_cap)?),
            discharge_cap: Some(fp("discharge_cap", &p.discharge_cap)?),
            eff_charge: Some(p.eff_charge),
            eff_discharge: Some(p.eff_discharge),
            batt_init: Some(p.batt_init),
            cyclic_battery: Some(p.cyclic_battery),
            hvac_capacitance: Some(p.hvac_capacitance),
            hvac_resistance: Some(p.hvac_resistance),
            hvac_eta: Some(p.hvac_eta),
            thermal_form: Some(p.thermal_form),
            temp_min: Some(fp("temp_min", &p.temp_min)?),
            temp_max: Some(fp("temp_max", &p.temp_max)?),
            temp_ref: Some(fp("temp_ref", &p.temp_ref)?),
            temp_init: Some(p.temp_init),
            trade_min: Some(fp("trade_min", &p.trade_min)?),
            trade_max: Some(fp("trade_max", &p.trade_max)?),
            reactive_load: Some(fp("reactive_load", &p.reactive_load)?),
            energy_rate: Some(p.energy_rate),
            peak_rate: Some(p.peak_rate),
            feedin_rate: Some(p.feedin_rate),
            degradation_coeff: Some(p.degradation_coeff),
            discomfort_coeff: Some(p.discomfort_coeff),
        });
    }
    let branches = format!("{sub}/branches.csv");
    let branch_path = dir.join(&branches);
    let mut w = csv::Writer::from_path(&branch_path).map_err(|e| CoreError::File {
        path: branch_path.display().to_string(),
        message: e.to_string(),
    })?;
    for (j, (r, x)) in scenario
        .network
        .resistance
        .iter()
        .zip(&scenario.network.reactance)
        .enumerate()
    {
        w.serialize(BranchRow {
            id: j + 1,
            r: *r,
            x: *x,
        })
        .map_err(|e| CoreError::File {
            path: branch_path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    w.flush()?;
    let net = &scenario.network;
    let cfg = ConfigFile {
        schema_version: SCHEMA_VERSION,
        timegrid: TimeGridConfig {
            horizon: scenario.grid.horizon,
            slot_hours: scenario.grid.slot_hours,
        },
        prosumers,
        network: NetworkConfig {
            branches_file: Some(branches),
            resistance: None,
            reactance: None,
            p_min: net.p_min,
            p_max: net.p_max,
            q_min: net.q_min,
            q_max: net.q_max,
            root_voltage: Some(file_profile("root_voltage".into(), &net.root_voltage)?),
            voltage_tol: Some(net.voltage_tol),
        },
        prices: PricesConfig {
            trade: Some(file_profile("trade_price".into(), &scenario.prices)?),
        },
        run: scenario.run,
    };
    let text = toml::to_string(&cfg).map_err(|e| CoreError::Scenario(e.to_string()))?;
    fs::write(config, text)?;
    Ok(())
}

/// Knobs of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub horizon: usize,
    /// Give every prosumer the parameters and profiles of prosumer 0.
    pub identical: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            horizon: 24,
            identical: false,
        }
    }
}

/// Deterministic community of `n` prosumers with a shared bell-shaped solar
/// curve (scaled per home), morning and evening load peaks with per-home
/// jitter, and a sinusoidal hot-day outdoor temperature.
pub fn generate_synthetic(n: usize, seed: u64) -> Scenario {
    generate_with(n, seed, SynthOptions::default())
}

pub fn generate_with(n: usize, seed: u64, opts: SynthOptions) -> Scenario {
    assert!(n >= 1, "at least one prosumer");
    let h = opts.horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SYNTHESIS_STREAM);
    let hour = |t: usize| (t as f64 + 0.5) * 24.0 / h as f64;
    let bell: Vec<f64> = (0..h)
        .map(|t| {
            let x = (hour(t) - 6.0) / 12.0;
            if (0.0..=1.0).contains(&x) {
                (PI * x).sin().powf(1.5)
            } else {
                0.0
            }
        })
        .collect();
    let outdoor: Vec<f64> = (0..h)
        .map(|t| 27.0 + 6.0 * (2.0 * PI * (hour(t) - 9.0) / 24.0).sin())
        .collect();
    let gauss = |x: f64, mu: f64, w: f64| (-(x - mu) * (x - mu) / (2.0 * w * w)).exp();

    let mut prosumers: Vec<ProsumerParams> = Vec::with_capacity(n);
    for i in 0..n {
        if opts.identical && i > 0 {
            let mut p = prosumers[0].clone();
            p.id = i;
            prosumers.push(p);
            continue;
        }
        // Roughly two homes in five have no panels.
        let solar_scale = if rng.random_bool(0.6) {
            rng.random_range(3.0..7.0)
        } else {
            0.0
        };
        let base = rng.random_range(0.3..0.6);
        let morning = rng.random_range(0.4..1.2);
        let evening = rng.random_range(0.8..2.0);
        let morning_at = 7.5 + rng.random_range(-1.5..1.5);
        let evening_at = 19.0 + rng.random_range(-2.0..2.0);
        let base_load: Vec<f64> = (0..h)
            .map(|t| {
                let x = hour(t);
                base + morning * gauss(x, morning_at, 1.2) + evening * gauss(x, evening_at, 1.8)
            })
            .collect();
        let capacity = rng.random_range(5.0..13.5);
        let rate = 0.25 * capacity;
        let temp_ref = rng.random_range(22.5..25.5);
        let eta = -rng.random_range(2.5..3.0);
        prosumers.push(ProsumerParams {
            id: i,
            solar_cap: bell.iter().map(|b| solar_scale * b).collect(),
            line_cap: vec![defaults::LINE_CAP; h],
            batt_capacity: capacity,
            soc_min: defaults::SOC_MIN,
            soc_max: defaults::SOC_MAX,
            charge_cap: vec![rate; h],
            discharge_cap: vec![rate; h],
            eff_charge: defaults::EFFICIENCY,
            eff_discharge: defaults::EFFICIENCY,
            batt_init: 0.5 * capacity,
            cyclic_battery: true,
            hvac_capacitance: defaults::HVAC_CAPACITANCE,
            hvac_resistance: defaults::HVAC_RESISTANCE,
            hvac_eta: eta,
            thermal_form: ThermalForm::Standard,
            temp_min: vec![defaults::TEMP_MIN; h],
            temp_max: vec![defaults::TEMP_MAX; h],
            temp_ref: vec![temp_ref; h],
            temp_init: temp_ref,
            trade_min: vec![-defaults::TRADE_CAP; h],
            trade_max: vec![defaults::TRADE_CAP; h],
            reactive_load: base_load.iter().map(|v| 0.2 * v).collect(),
            base_load,
            outdoor_temp: outdoor.clone(),
            energy_rate: defaults::ENERGY_RATE,
            peak_rate: defaults::PEAK_RATE,
            feedin_rate: defaults::FEEDIN_RATE,
            degradation_coeff: defaults::DEGRADATION,
            discomfort_coeff: defaults::DISCOMFORT,
        });
    }
    let bound = defaults::LINE_CAP * n as f64 * 2.0;
    let mut network = NetworkModel::uniform(n, 0.0, 0.0, bound, bound, h);
    // Denser feeders get shorter spans: past ten homes the total line
    // impedance stays fixed.
    let span = (10.0 / n as f64).min(1.0);
    for j in 0..n {
        network.resistance[j] = 2e-4 * span * rng.random_range(0.8..1.2);
        network.reactance[j] = 1e-4 * span * rng.random_range(0.8..1.2);
    }
    let prices = vec![default_trade_price(&prosumers); h];
    Scenario {
        grid: TimeGrid {
            horizon: h,
            slot_hours: 24.0 / h as f64,
        },
        prosumers,
        network,
        prices,
        run: RunConfig::default(),
    }
}
