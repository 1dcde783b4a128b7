//! Shared QP building blocks. The prosumer subproblem, the operator
//! subproblem and the centralized problem are all stacked from these
//! builders so the three paths cannot drift apart.
//!
//! Nonsmooth cost terms are lifted: the peak charge uses one epigraph
//! variable `z ≥ p_G[t]`, and each discomfort term `|T[t] - T_ref[t]|` uses a
//! slack `s[t]` with `s ≥ T - T_ref` and `s ≥ T_ref - T`.

use peergrid_qp::{QuadraticProgram, TripletMatrix};

use crate::error::{ConstraintFamily, Result};
use crate::model::{simulate_battery, simulate_temperature, ProsumerParams, ScheduleDecision};
use crate::network::{NetworkModel, NetworkState};

/// Incrementally assembled standard-form QP `min ½xᵀPx + qᵀx, l ≤ Ax ≤ u`.
#[derive(Debug, Clone, Default)]
pub struct QpBuilder {
    num_vars: usize,
    p: Vec<(usize, usize, f64)>,
    q: Vec<f64>,
    a: Vec<(usize, usize, f64)>,
    l: Vec<f64>,
    u: Vec<f64>,
    families: Vec<Option<ConstraintFamily>>,
}

impl QpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates `count` variables and returns the index of the first.
    pub fn add_vars(&mut self, count: usize) -> usize {
        let start = self.num_vars;
        self.num_vars += count;
        self.q.resize(self.num_vars, 0.0);
        start
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.l.len()
    }

    pub fn add_linear(&mut self, var: usize, coeff: f64) {
        self.q[var] += coeff;
    }

    /// Adds `½·coeff·x²` to the objective.
    pub fn add_square(&mut self, var: usize, coeff: f64) {
        self.p.push((var, var, coeff));
    }

    pub fn add_row(&mut self, entries: &[(usize, f64)], lower: f64, upper: f64) -> usize {
        self.add_tagged_row(entries, lower, upper, None)
    }

    pub fn add_tagged_row(
        &mut self,
        entries: &[(usize, f64)],
        lower: f64,
        upper: f64,
        family: Option<ConstraintFamily>,
    ) -> usize {
        let row = self.l.len();
        for &(var, coeff) in entries {
            debug_assert!(var < self.num_vars);
            self.a.push((row, var, coeff));
        }
        self.l.push(lower);
        self.u.push(upper);
        self.families.push(family);
        row
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> usize {
        self.add_row(&[(var, 1.0)], lower, upper)
    }

    pub fn set_row_bounds(&mut self, row: usize, lower: f64, upper: f64) {
        self.l[row] = lower;
        self.u[row] = upper;
    }

    pub fn row_family(&self, row: usize) -> Option<ConstraintFamily> {
        self.families[row]
    }

    /// Drops the bounds of every row tagged with `family`.
    pub fn relax_family(&mut self, family: ConstraintFamily) {
        for (row, f) in self.families.iter().enumerate() {
            if *f == Some(family) {
                self.l[row] = f64::NEG_INFINITY;
                self.u[row] = f64::INFINITY;
            }
        }
    }

    pub fn families(&self) -> Vec<ConstraintFamily> {
        let mut out: Vec<ConstraintFamily> = Vec::new();
        for f in self.families.iter().flatten() {
            if !out.contains(f) {
                out.push(*f);
            }
        }
        out
    }

    pub fn build(&self) -> Result<QuadraticProgram> {
        let n = self.num_vars;
        let mut p = TripletMatrix::new(n, n);
        for &(i, j, v) in &self.p {
            p.push_sym(i, j, v);
        }
        let mut a = TripletMatrix::new(self.l.len(), n);
        for &(i, j, v) in &self.a {
            a.push(i, j, v);
        }
        Ok(QuadraticProgram::new(
            p.to_csc(),
            self.q.clone(),
            a.to_csc(),
            self.l.clone(),
            self.u.clone(),
        )?)
    }
}

/// Column offsets of one prosumer's variables; each family spans `horizon`
/// consecutive columns except the single peak variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProsumerVars {
    pub horizon: usize,
    pub grid: usize,
    pub solar: usize,
    pub feedin: usize,
    pub hvac: usize,
    pub charge: usize,
    pub discharge: usize,
    pub trade: usize,
    pub net: usize,
    pub temp: usize,
    pub slack: usize,
    pub peak: usize,
}

impl ProsumerVars {
    pub const COUNT_PER_SLOT: usize = 10;

    pub fn count(horizon: usize) -> usize {
        Self::COUNT_PER_SLOT * horizon + 1
    }

    fn values(x: &[f64], start: usize, h: usize) -> Vec<f64> {
        x[start..start + h].to_vec()
    }
}

/// Adds the decision variables, constraints and scheduling cost of one
/// prosumer. With `trading` off the trade variables are pinned to zero.
pub fn add_prosumer_block(
    b: &mut QpBuilder,
    params: &ProsumerParams,
    trading: bool,
) -> ProsumerVars {
    let h = params.horizon();
    let base = b.add_vars(ProsumerVars::count(h));
    let v = ProsumerVars {
        horizon: h,
        grid: base,
        solar: base + h,
        feedin: base + 2 * h,
        hvac: base + 3 * h,
        charge: base + 4 * h,
        discharge: base + 5 * h,
        trade: base + 6 * h,
        net: base + 7 * h,
        temp: base + 8 * h,
        slack: base + 9 * h,
        peak: base + 10 * h,
    };
    let inf = f64::INFINITY;
    let (a, bh, c) = params.thermal_coefficients();

    for t in 0..h {
        b.bound(v.grid + t, 0.0, params.line_cap[t]);
        b.bound(v.solar + t, 0.0, inf);
        b.bound(v.feedin + t, 0.0, inf);
        b.add_row(
            &[(v.solar + t, 1.0), (v.feedin + t, 1.0)],
            f64::NEG_INFINITY,
            params.solar_cap[t],
        );
        b.bound(v.hvac + t, 0.0, inf);
        b.bound(v.charge + t, 0.0, params.charge_cap[t]);
        b.bound(v.discharge + t, 0.0, params.discharge_cap[t]);
        if trading {
            b.bound(v.trade + t, params.trade_min[t], params.trade_max[t]);
        } else {
            b.bound(v.trade + t, 0.0, 0.0);
        }

        // level[t] - init = Σ_{s≤t} (η_ch·ch[s] - dis[s]/η_dis)
        let mut level = Vec::with_capacity(2 * (t + 1));
        for s in 0..=t {
            level.push((v.charge + s, params.eff_charge));
            level.push((v.discharge + s, -1.0 / params.eff_discharge));
        }
        let (lo, hi) = if params.cyclic_battery && t + 1 == h {
            (0.0, 0.0)
        } else {
            (
                params.batt_min() - params.batt_init,
                params.batt_max() - params.batt_init,
            )
        };
        b.add_tagged_row(&level, lo, hi, Some(ConstraintFamily::Battery));

        // T[t] - a·T[t-1] - b·p[t] = c·T_out[t]  (T[-1] = temp_init)
        let rhs = c * params.outdoor_temp[t] + if t == 0 { a * params.temp_init } else { 0.0 };
        let mut dyn_row = vec![(v.temp + t, 1.0), (v.hvac + t, -bh)];
        if t > 0 {
            dyn_row.push((v.temp + t - 1, -a));
        }
        b.add_row(&dyn_row, rhs, rhs);
        b.add_tagged_row(
            &[(v.temp + t, 1.0)],
            params.temp_min[t],
            params.temp_max[t],
            Some(ConstraintFamily::Comfort),
        );
        b.add_row(
            &[(v.slack + t, 1.0), (v.temp + t, -1.0)],
            -params.temp_ref[t],
            inf,
        );
        b.add_row(
            &[(v.slack + t, 1.0), (v.temp + t, 1.0)],
            params.temp_ref[t],
            inf,
        );

        b.add_row(&[(v.peak, 1.0), (v.grid + t, -1.0)], 0.0, inf);

        // p_S + p_G + p_dis + p_trade - p_ch - p_hvac = p_base
        b.add_tagged_row(
            &[
                (v.solar + t, 1.0),
                (v.grid + t, 1.0),
                (v.discharge + t, 1.0),
                (v.trade + t, 1.0),
                (v.charge + t, -1.0),
                (v.hvac + t, -1.0),
            ],
            params.base_load[t],
            params.base_load[t],
            Some(ConstraintFamily::Balance),
        );
        b.add_row(
            &[(v.net + t, 1.0), (v.grid + t, -1.0), (v.feedin + t, 1.0)],
            0.0,
            0.0,
        );

        b.add_linear(v.grid + t, params.energy_rate);
        b.add_linear(v.feedin + t, -params.feedin_rate);
        b.add_linear(v.slack + t, params.discomfort_coeff);
        b.add_square(v.discharge + t, 2.0 * params.degradation_coeff);
    }
    b.add_linear(v.peak, params.peak_rate);
    v
}

pub fn add_trade_cost(b: &mut QpBuilder, vars: &ProsumerVars, prices: &[f64]) {
    for (t, &pi) in prices.iter().enumerate() {
        b.add_linear(vars.trade + t, pi);
    }
}

/// Adds `Σ_t [sign·dual[t]·x[t] + (ρ/2)(x[t] - target[t])²]` over the block
/// starting at `start`, dropping the constant.
pub fn add_proximal(
    b: &mut QpBuilder,
    start: usize,
    dual: &[f64],
    sign: f64,
    target: &[f64],
    rho: f64,
) {
    for t in 0..dual.len() {
        b.add_square(start + t, rho);
        b.add_linear(start + t, sign * dual[t] - rho * target[t]);
    }
}

/// Column offsets of the feeder variables. Per slot the layout is
/// `p_inj[0..=N], q_inj[0..=N], V[1..=N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkVars {
    pub start: usize,
    pub nodes: usize,
    pub horizon: usize,
}

impl NetworkVars {
    fn stride(&self) -> usize {
        3 * self.nodes + 2
    }

    pub fn p_inj(&self, t: usize, node: usize) -> usize {
        self.start + t * self.stride() + node
    }

    pub fn q_inj(&self, t: usize, node: usize) -> usize {
        self.start + t * self.stride() + self.nodes + 1 + node
    }

    /// Voltage at `node ≥ 1`.
    pub fn voltage(&self, t: usize, node: usize) -> usize {
        debug_assert!(node >= 1);
        self.start + t * self.stride() + 2 * (self.nodes + 1) + node - 1
    }

    pub fn extract(&self, x: &[f64], outputs: Vec<Vec<f64>>, root_voltage: &[f64]) -> NetworkState {
        let n = self.nodes;
        let h = self.horizon;
        let per_slot = |f: &dyn Fn(usize, usize) -> usize, from: usize| -> Vec<Vec<f64>> {
            (0..h)
                .map(|t| (from..=n).map(|j| x[f(t, j)]).collect())
                .collect()
        };
        let mut voltage = per_slot(&|t, j| self.voltage(t, j), 1);
        for (t, row) in voltage.iter_mut().enumerate() {
            row.insert(0, root_voltage[t]);
        }
        NetworkState {
            p_injection: per_slot(&|t, j| self.p_inj(t, j), 0),
            q_injection: per_slot(&|t, j| self.q_inj(t, j), 0),
            voltage,
            p_output: outputs,
        }
    }
}

/// Adds trade balance, injection recursions, injection bounds and the
/// voltage model. `trade[i]`/`net[i]` are the first columns of prosumer
/// `i`'s coupling vectors; `q_load[i]` its reactive demand.
pub fn add_network_block(
    b: &mut QpBuilder,
    trade: &[usize],
    net: &[usize],
    network: &NetworkModel,
    q_load: &[&[f64]],
    horizon: usize,
) -> NetworkVars {
    let n = trade.len();
    debug_assert_eq!(n, net.len());
    debug_assert_eq!(n, network.branches());
    let start = b.add_vars(horizon * (3 * n + 2));
    let nv = NetworkVars {
        start,
        nodes: n,
        horizon,
    };
    use ConstraintFamily::*;
    for t in 0..horizon {
        let balance: Vec<(usize, f64)> = trade.iter().map(|&c| (c + t, 1.0)).collect();
        b.add_tagged_row(&balance, 0.0, 0.0, Some(TradeBalance));

        for j in 0..=n {
            b.add_tagged_row(
                &[(nv.p_inj(t, j), 1.0)],
                network.p_min,
                network.p_max,
                Some(ActiveInjection),
            );
            b.add_tagged_row(
                &[(nv.q_inj(t, j), 1.0)],
                network.q_min,
                network.q_max,
                Some(ReactiveInjection),
            );
        }
        let v0 = network.root_voltage[t];
        for j in 1..=n {
            let i = j - 1;
            // p_inj[j] - p_inj[j-1] - p_out[i] = 0 with p_out = -net - trade
            b.add_row(
                &[
                    (nv.p_inj(t, j), 1.0),
                    (nv.p_inj(t, j - 1), -1.0),
                    (net[i] + t, 1.0),
                    (trade[i] + t, 1.0),
                ],
                0.0,
                0.0,
            );
            b.add_row(
                &[(nv.q_inj(t, j), 1.0), (nv.q_inj(t, j - 1), -1.0)],
                -q_load[i][t],
                -q_load[i][t],
            );
            // V[j] - V[j-1] + (r_j·p_inj[j] + x_j·q_inj[j]) / V0 = 0
            let r = network.resistance[i] / v0;
            let x = network.reactance[i] / v0;
            let mut row = vec![
                (nv.voltage(t, j), 1.0),
                (nv.p_inj(t, j), r),
                (nv.q_inj(t, j), x),
            ];
            let rhs = if j == 1 {
                v0
            } else {
                row.push((nv.voltage(t, j - 1), -1.0));
                0.0
            };
            b.add_row(&row, rhs, rhs);
            b.add_tagged_row(
                &[(nv.voltage(t, j), 1.0)],
                1.0 - network.voltage_tol,
                1.0 + network.voltage_tol,
                Some(Voltage),
            );
        }
    }
    nv
}

/// Reads one prosumer's schedule out of a solution vector. Battery level and
/// indoor temperature are re-simulated from the decisions.
pub fn extract_decision(
    x: &[f64],
    vars: &ProsumerVars,
    params: &ProsumerParams,
) -> Result<ScheduleDecision> {
    let h = vars.horizon;
    let take = |start| ProsumerVars::values(x, start, h);
    let charge = take(vars.charge);
    let discharge = take(vars.discharge);
    let hvac = take(vars.hvac);
    Ok(ScheduleDecision {
        grid: take(vars.grid),
        solar: take(vars.solar),
        feedin: take(vars.feedin),
        battery: simulate_battery(&charge, &discharge, params)?,
        indoor_temp: simulate_temperature(&hvac, params)?,
        hvac,
        charge,
        discharge,
        trade: take(vars.trade),
        net: take(vars.net),
    })
}
