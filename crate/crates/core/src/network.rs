//! Distribution operator: radial feeder model, the auxiliary-variable
//! subproblem, dual updates and ADMM residuals.
//!
//! Node 0 is the slack root. Prosumer `i` (0-based) feeds branch `i + 1`,
//! which connects node `i` to node `i + 1`:
//!
//! ```text
//! p_inj[i+1] = p_inj[i] + p_out[i]      p_out = -p̃_net - p̃_trade
//! q_inj[i+1] = q_inj[i] - q_load[i]
//! V[i+1]     = V[i] - (r[i+1]·p_inj[i+1] + x[i+1]·q_inj[i+1]) / V0
//! ```
//!
//! The root injections are free within the injection bounds.

use peergrid_qp::{solve_warm, QpStatus, QuadraticProgram, SolverSettings};
use serde::{Deserialize, Serialize};

use crate::error::{ConstraintFamily, CoreError, ModelError, Result};
use crate::formulation::{add_network_block, add_proximal, NetworkVars, QpBuilder};
use crate::prosumer::{AgentUpdate, CouplingSignals};

fn default_voltage_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    /// Per-branch resistance (p.u.); branch `i` feeds prosumer `i`.
    pub resistance: Vec<f64>,
    pub reactance: Vec<f64>,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Root voltage per slot (p.u.).
    pub root_voltage: Vec<f64>,
    #[serde(default = "default_voltage_tol")]
    pub voltage_tol: f64,
}

impl NetworkModel {
    /// Feeder with identical branches and unit root voltage.
    pub fn uniform(
        branches: usize,
        r: f64,
        x: f64,
        p_bound: f64,
        q_bound: f64,
        horizon: usize,
    ) -> Self {
        Self {
            resistance: vec![r; branches],
            reactance: vec![x; branches],
            p_min: -p_bound,
            p_max: p_bound,
            q_min: -q_bound,
            q_max: q_bound,
            root_voltage: vec![1.0; horizon],
            voltage_tol: default_voltage_tol(),
        }
    }

    pub fn branches(&self) -> usize {
        self.resistance.len()
    }

    pub fn validate(&self, branches: usize, horizon: usize) -> Result<(), ModelError> {
        let dim = |field, v: &[f64], expected| {
            if v.len() == expected {
                Ok(())
            } else {
                Err(ModelError::Dimension {
                    field,
                    expected,
                    got: v.len(),
                })
            }
        };
        dim("resistance", &self.resistance, branches)?;
        dim("reactance", &self.reactance, branches)?;
        dim("root_voltage", &self.root_voltage, horizon)?;
        let invalid = |m: &str| Err(ModelError::Invalid(format!("network: {m}")));
        if self
            .resistance
            .iter()
            .chain(&self.reactance)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return invalid("branch resistance and reactance must be finite and nonnegative");
        }
        if self.p_min.is_nan() || self.p_max.is_nan() || self.p_min > self.p_max {
            return invalid("active injection bounds are inverted");
        }
        if self.q_min.is_nan() || self.q_max.is_nan() || self.q_min > self.q_max {
            return invalid("reactive injection bounds are inverted");
        }
        if !(self.voltage_tol > 0.0 && self.voltage_tol < 1.0) {
            return invalid("voltage tolerance must lie in (0, 1)");
        }
        if self
            .root_voltage
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return invalid("root voltage must be positive");
        }
        Ok(())
    }
}

/// Feeder state; every field is indexed `[slot][node]` (or `[slot][prosumer]`
/// for `p_output`). `voltage[t][0]` is the root voltage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkState {
    pub p_injection: Vec<Vec<f64>>,
    pub q_injection: Vec<Vec<f64>>,
    pub voltage: Vec<Vec<f64>>,
    pub p_output: Vec<Vec<f64>>,
}

impl NetworkState {
    /// Largest violation of the recursions, injection bounds and voltage band.
    pub fn max_violation(&self, network: &NetworkModel, q_load: &[Vec<f64>]) -> f64 {
        let mut worst = 0.0f64;
        let excess = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
        for t in 0..self.p_injection.len() {
            let (p, q, v) = (&self.p_injection[t], &self.q_injection[t], &self.voltage[t]);
            let v0 = network.root_voltage[t];
            worst = worst.max((v[0] - v0).abs());
            for j in 0..p.len() {
                worst = worst.max(excess(p[j], network.p_min, network.p_max));
                worst = worst.max(excess(q[j], network.q_min, network.q_max));
            }
            for j in 1..p.len() {
                let i = j - 1;
                worst = worst.max((p[j] - p[j - 1] - self.p_output[t][i]).abs());
                worst = worst.max((q[j] - q[j - 1] + q_load[i][t]).abs());
                let drop = (network.resistance[i] * p[j] + network.reactance[i] * q[j]) / v0;
                worst = worst.max((v[j] - v[j - 1] + drop).abs());
                worst = worst.max(excess(
                    v[j],
                    1.0 - network.voltage_tol,
                    1.0 + network.voltage_tol,
                ));
            }
        }
        worst
    }

    pub fn voltage_range(&self) -> (f64, f64) {
        self.voltage
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Runs the feeder recursions forward from given root injections.
/// `p_output` is `[slot][prosumer]`, `q_load` is `[prosumer][slot]`.
pub fn evaluate_network(
    network: &NetworkModel,
    p_output: &[Vec<f64>],
    q_load: &[Vec<f64>],
    root_p: &[f64],
    root_q: &[f64],
) -> NetworkState {
    let n = network.branches();
    let mut state = NetworkState {
        p_output: p_output.to_vec(),
        ..NetworkState::default()
    };
    for t in 0..p_output.len() {
        let v0 = network.root_voltage[t];
        let mut p = vec![root_p[t]; n + 1];
        let mut q = vec![root_q[t]; n + 1];
        let mut v = vec![v0; n + 1];
        for j in 1..=n {
            p[j] = p[j - 1] + p_output[t][j - 1];
            q[j] = q[j - 1] - q_load[j - 1][t];
            v[j] = v[j - 1]
                - (network.resistance[j - 1] * p[j] + network.reactance[j - 1] * q[j]) / v0;
        }
        state.p_injection.push(p);
        state.q_injection.push(q);
        state.voltage.push(v);
    }
    state
}

/// `p_out = -net - trade`, arranged `[slot][prosumer]`.
pub fn output_power(trade: &[Vec<f64>], net: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let h = trade.first().map_or(0, Vec::len);
    (0..h)
        .map(|t| {
            trade
                .iter()
                .zip(net)
                .map(|(tr, ne)| -ne[t] - tr[t])
                .collect()
        })
        .collect()
}

/// Index layout of the operator subproblem.
#[derive(Debug, Clone)]
pub struct UpLayout {
    pub aux_trade: Vec<usize>,
    pub aux_net: Vec<usize>,
    pub network: NetworkVars,
}

/// Builds the operator subproblem: minimize
/// `Σ_i λ_tradeᵀp̃_trade + (ρ/2)‖p̃_trade - p_trade‖² + (same for net)`
/// subject to trade balance and the feeder model.
pub fn build_up(
    updates: &[&AgentUpdate],
    signals: &[CouplingSignals],
    network: &NetworkModel,
    q_load: &[&[f64]],
) -> Result<(QpBuilder, UpLayout)> {
    let n = updates.len();
    let h = network.root_voltage.len();
    network.validate(n, h)?;
    let mut b = QpBuilder::new();
    let mut aux_trade = Vec::with_capacity(n);
    let mut aux_net = Vec::with_capacity(n);
    for (u, s) in updates.iter().zip(signals) {
        let tr = b.add_vars(h);
        let ne = b.add_vars(h);
        add_proximal(&mut b, tr, &s.dual_trade, 1.0, &u.p_trade, s.rho_trade);
        add_proximal(&mut b, ne, &s.dual_net, 1.0, &u.p_net, s.rho_net);
        aux_trade.push(tr);
        aux_net.push(ne);
    }
    let network_vars = add_network_block(&mut b, &aux_trade, &aux_net, network, q_load, h);
    Ok((
        b,
        UpLayout {
            aux_trade,
            aux_net,
            network: network_vars,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct UpSolution {
    pub aux_trade: Vec<Vec<f64>>,
    pub aux_net: Vec<Vec<f64>>,
    pub network: NetworkState,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
}

/// Re-solves with each tagged family relaxed in turn and names the first
/// whose removal restores feasibility.
pub(crate) fn diagnose_infeasibility(b: &QpBuilder, settings: &SolverSettings) -> ConstraintFamily {
    for family in b.families() {
        let mut relaxed = b.clone();
        relaxed.relax_family(family);
        let Ok(qp) = relaxed.build() else { continue };
        if let Ok(sol) = solve_warm(&qp, settings, None, None) {
            if sol.status != QpStatus::PrimalInfeasible {
                return family;
            }
        }
    }
    ConstraintFamily::Unknown
}

pub fn solve_up(
    updates: &[&AgentUpdate],
    signals: &[CouplingSignals],
    network: &NetworkModel,
    q_load: &[&[f64]],
    settings: &SolverSettings,
    warm: Option<(&[f64], &[f64])>,
) -> Result<UpSolution> {
    let (b, layout) = build_up(updates, signals, network, q_load)?;
    let qp: QuadraticProgram = b.build()?;
    let warm = warm.filter(|(x, y)| x.len() == qp.num_vars() && y.len() == qp.num_constraints());
    let sol = solve_warm(&qp, settings, warm.map(|w| w.0), warm.map(|w| w.1))?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::PrimalInfeasible => {
            return Err(CoreError::Infeasible {
                context: "operator subproblem".into(),
                family: diagnose_infeasibility(&b, settings),
            })
        }
        QpStatus::MaxIterations => {
            return Err(CoreError::NotConverged {
                context: "operator subproblem".into(),
                iterations: sol.iterations,
            })
        }
    }
    let h = network.root_voltage.len();
    let take = |start: usize| sol.x[start..start + h].to_vec();
    let aux_trade: Vec<Vec<f64>> = layout.aux_trade.iter().map(|&s| take(s)).collect();
    let aux_net: Vec<Vec<f64>> = layout.aux_net.iter().map(|&s| take(s)).collect();
    let outputs = output_power(&aux_trade, &aux_net);
    let state = layout
        .network
        .extract(&sol.x, outputs, &network.root_voltage);
    Ok(UpSolution {
        aux_trade,
        aux_net,
        network: state,
        x: sol.x,
        y: sol.y,
        iterations: sol.iterations,
    })
}

/// `λ ← λ + ρ·(p̃ - p)` for one coupling vector.
pub fn dual_step(dual: &[f64], aux: &[f64], local: &[f64], rho: f64) -> Vec<f64> {
    dual.iter()
        .zip(aux.iter().zip(local))
        .map(|(l, (a, p))| l + rho * (a - p))
        .collect()
}

/// Applies the dual update to every prosumer's signals in place and stores
/// the new auxiliary values. Returns the Euclidean norm of the stacked dual
/// increments.
pub fn update_duals(
    signals: &mut [CouplingSignals],
    aux: &UpSolution,
    updates: &[&AgentUpdate],
) -> f64 {
    let mut sq = 0.0;
    for (i, s) in signals.iter_mut().enumerate() {
        let tr = dual_step(
            &s.dual_trade,
            &aux.aux_trade[i],
            &updates[i].p_trade,
            s.rho_trade,
        );
        let ne = dual_step(&s.dual_net, &aux.aux_net[i], &updates[i].p_net, s.rho_net);
        sq += tr
            .iter()
            .zip(&s.dual_trade)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
        sq += ne
            .iter()
            .zip(&s.dual_net)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
        s.dual_trade = tr;
        s.dual_net = ne;
        s.aux_trade.clone_from(&aux.aux_trade[i]);
        s.aux_net.clone_from(&aux.aux_net[i]);
    }
    sq.sqrt()
}

/// `Σ_i ‖(p_trade,i - p̃_trade,i, p_net,i - p̃_net,i)‖₂`.
pub fn primal_residual(
    updates: &[&AgentUpdate],
    aux_trade: &[Vec<f64>],
    aux_net: &[Vec<f64>],
) -> f64 {
    updates
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let sq =
                |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            (sq(&u.p_trade, &aux_trade[i]) + sq(&u.p_net, &aux_net[i])).sqrt()
        })
        .sum()
}

/// `‖stacked ρ·(p̃_new - p̃_held)‖₂`, the movement of the auxiliaries.
pub fn aux_step(held: &[CouplingSignals], aux: &UpSolution) -> f64 {
    held.iter()
        .enumerate()
        .map(|(i, s)| {
            let sq = |a: &[f64], b: &[f64], rho: f64| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (rho * (x - y)).powi(2))
                    .sum::<f64>()
            };
            sq(&aux.aux_trade[i], &s.aux_trade, s.rho_trade)
                + sq(&aux.aux_net[i], &s.aux_net, s.rho_net)
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖stacked (λ(k) - λ(k-1))‖₂` over all prosumers.
pub fn dual_residual(current: &[CouplingSignals], previous: &[CouplingSignals]) -> f64 {
    current
        .iter()
        .zip(previous)
        .map(|(c, p)| {
            let sq =
                |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            sq(&c.dual_trade, &p.dual_trade) + sq(&c.dual_net, &p.dual_net)
        })
        .sum::<f64>()
        .sqrt()
}

/// The last update received from one prosumer and the iteration it was sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedUpdate {
    pub update: AgentUpdate,
    pub stamp: usize,
}

/// Everything the operator holds between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorState {
    pub signals: Vec<CouplingSignals>,
    pub received: Vec<ReceivedUpdate>,
    pub network: NetworkState,
    /// `(primal, dual)` after each completed iteration.
    pub history: Vec<(f64, f64)>,
    /// `‖stacked ρ·(p̃(k) - p̃(k-1))‖₂` of the latest iteration.
    pub aux_step: f64,
    pub(crate) warm: Option<(Vec<f64>, Vec<f64>)>,
}

impl OperatorState {
    /// Zero duals, zero auxiliaries and zero placeholder updates.
    pub fn new(prosumers: usize, horizon: usize, rho: f64) -> Self {
        Self {
            signals: (0..prosumers)
                .map(|_| CouplingSignals::zero(horizon, rho))
                .collect(),
            received: (0..prosumers)
                .map(|id| ReceivedUpdate {
                    update: AgentUpdate::zero(id, horizon),
                    stamp: 0,
                })
                .collect(),
            network: NetworkState::default(),
            history: Vec::new(),
            aux_step: 0.0,
            warm: None,
        }
    }

    pub fn receive(&mut self, update: AgentUpdate) {
        let id = update.id;
        let stamp = update.k;
        self.received[id] = ReceivedUpdate { update, stamp };
    }

    pub fn updates(&self) -> Vec<&AgentUpdate> {
        self.received.iter().map(|r| &r.update).collect()
    }

    /// Ages `k - stamp` of the updates the operator would consume at `k`.
    pub fn ages(&self, k: usize) -> Vec<usize> {
        self.received
            .iter()
            .map(|r| k.saturating_sub(r.stamp))
            .collect()
    }

    pub fn set_rho(&mut self, rho: f64) {
        for s in &mut self.signals {
            s.rho_trade = rho;
            s.rho_net = rho;
        }
    }

    /// Solves the operator subproblem on the held updates, updates duals and
    /// records residuals.
    pub fn iterate(
        &mut self,
        network: &NetworkModel,
        q_load: &[&[f64]],
        settings: &SolverSettings,
    ) -> Result<(f64, f64)> {
        let updates: Vec<&AgentUpdate> = self.received.iter().map(|r| &r.update).collect();
        let warm = self
            .warm
            .as_ref()
            .map(|(x, y)| (x.as_slice(), y.as_slice()));
        let sol = solve_up(&updates, &self.signals, network, q_load, settings, warm)?;
        let primal = primal_residual(&updates, &sol.aux_trade, &sol.aux_net);
        self.aux_step = aux_step(&self.signals, &sol);
        let updates: Vec<AgentUpdate> = updates.into_iter().cloned().collect();
        let refs: Vec<&AgentUpdate> = updates.iter().collect();
        let dual = update_duals(&mut self.signals, &sol, &refs);
        self.history.push((primal, dual));
        self.network = sol.network;
        self.warm = Some((sol.x, sol.y));
        Ok((primal, dual))
    }

    pub fn residuals(&self) -> Result<(f64, f64)> {
        self.history.last().copied().ok_or(CoreError::NoIteration)
    }
}
