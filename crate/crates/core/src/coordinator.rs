//! The outer ADMM loop with asynchronous participation.
//!
//! One iteration `k`:
//! 1. draw the active set 𝓝(k);
//! 2. active prosumers receive the operator's current signals and solve
//!    their subproblems in parallel;
//! 3. the operator keeps the last received update of every inactive
//!    prosumer;
//! 4. the operator solves its subproblem;
//! 5. duals are updated;
//! 6. the new signals wait for each prosumer's next active iteration;
//! 7. residuals are checked against the thresholds.
//!
//! A prosumer outside 𝓝(k) neither receives nor sends anything that
//! iteration. A subproblem that hits its iteration cap counts as a missed
//! update.

use peergrid_qp::SolverSettings;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{evaluate_schedule_cost, evaluate_trading_cost, ScheduleDecision};
use crate::network::{NetworkState, OperatorState};
use crate::prosumer::{AgentUpdate, CouplingSignals, ProsumerAgent};
use crate::scenario::Scenario;

/// RNG stream used for activation draws; synthesis uses its own stream.
pub const ACTIVATION_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActivationModel {
    All,
    Bernoulli {
        p_active: f64,
    },
    FixedDropout {
        fraction: f64,
    },
    /// Bernoulli draws, except that a prosumer whose last update is older
    /// than `max_delay` iterations is forced active.
    BoundedDelay {
        max_delay: usize,
        p_active: f64,
    },
}

impl Default for ActivationModel {
    fn default() -> Self {
        ActivationModel::Bernoulli { p_active: 0.8 }
    }
}

impl ActivationModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::Scenario(format!("activation: {m}")));
        match *self {
            ActivationModel::All => Ok(()),
            ActivationModel::Bernoulli { p_active }
            | ActivationModel::BoundedDelay { p_active, .. }
                if !(p_active > 0.0 && p_active <= 1.0) =>
            {
                bad("p_active must lie in (0, 1]")
            }
            ActivationModel::BoundedDelay { max_delay: 0, .. } => {
                bad("max_delay must be at least 1")
            }
            ActivationModel::FixedDropout { fraction } if !(0.0..1.0).contains(&fraction) => {
                bad("dropout fraction must lie in [0, 1)")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepsizeSchedule {
    Constant {
        rho0: f64,
    },
    /// `ρ(k) = ρ0 / k`
    Harmonic {
        rho0: f64,
    },
}

impl Default for StepsizeSchedule {
    fn default() -> Self {
        StepsizeSchedule::Harmonic { rho0: 1.0 }
    }
}

impl StepsizeSchedule {
    /// Penalty at iteration `k ≥ 1`.
    pub fn rho(&self, k: usize) -> f64 {
        match *self {
            StepsizeSchedule::Constant { rho0 } => rho0,
            StepsizeSchedule::Harmonic { rho0 } => rho0 / k.max(1) as f64,
        }
    }

    pub fn rho0(&self) -> f64 {
        match *self {
            StepsizeSchedule::Constant { rho0 } | StepsizeSchedule::Harmonic { rho0 } => rho0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sync,
    #[default]
    Async,
}

fn default_eps() -> f64 {
    1e-2
}

fn default_max_iter() -> usize {
    2000
}

fn default_qp_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Ignored in sync mode.
    #[serde(default)]
    pub activation: ActivationModel,
    #[serde(default)]
    pub stepsize: StepsizeSchedule,
    #[serde(default = "default_eps")]
    pub eps_primal: f64,
    #[serde(default = "default_eps")]
    pub eps_dual: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    /// Absolute and relative tolerance of every subproblem solve.
    #[serde(default = "default_qp_tol")]
    pub qp_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            activation: ActivationModel::default(),
            stepsize: StepsizeSchedule::default(),
            eps_primal: default_eps(),
            eps_dual: default_eps(),
            max_iter: default_max_iter(),
            seed: 0,
            qp_tol: default_qp_tol(),
        }
    }
}

impl RunConfig {
    pub fn sync() -> Self {
        Self {
            mode: Mode::Sync,
            activation: ActivationModel::All,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.activation.validate()?;
        if !(self.eps_primal > 0.0 && self.eps_dual > 0.0) {
            return Err(CoreError::Scenario("thresholds must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(CoreError::Scenario("max_iter must be at least 1".into()));
        }
        if !(self.stepsize.rho0() > 0.0 && self.stepsize.rho0().is_finite()) {
            return Err(CoreError::Scenario("rho0 must be positive".into()));
        }
        if !(self.qp_tol > 0.0) {
            return Err(CoreError::Scenario("qp_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn effective_activation(&self) -> ActivationModel {
        match self.mode {
            Mode::Sync => ActivationModel::All,
            Mode::Async => self.activation,
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            abs_tol: self.qp_tol,
            rel_tol: self.qp_tol,
            ..SolverSettings::default()
        }
    }
}

/// `primal ≤ ε₁ ∧ dual ≤ ε₂`.
pub fn check_convergence(primal: f64, dual: f64, eps_primal: f64, eps_dual: f64) -> bool {
    primal <= eps_primal && dual <= eps_dual
}

/// Draws active sets from the configured model with its own RNG stream.
#[derive(Debug, Clone)]
pub struct ActivationSampler {
    model: ActivationModel,
    rng: ChaCha8Rng,
}

impl ActivationSampler {
    pub fn new(model: ActivationModel, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ACTIVATION_STREAM);
        Self { model, rng }
    }

    /// `ages[i]` is `k - stamp_i`, the age prosumer `i`'s held update would
    /// have if it stayed inactive at `k`.
    pub fn draw(&mut self, ages: &[usize]) -> Vec<bool> {
        let n = ages.len();
        match self.model {
            ActivationModel::All => vec![true; n],
            ActivationModel::Bernoulli { p_active } => {
                (0..n).map(|_| self.rng.random_bool(p_active)).collect()
            }
            ActivationModel::FixedDropout { fraction } => {
                let dropped = ((fraction * n as f64).round() as usize).min(n);
                let mut active = vec![true; n];
                for i in sample(&mut self.rng, n, dropped) {
                    active[i] = false;
                }
                active
            }
            ActivationModel::BoundedDelay {
                max_delay,
                p_active,
            } => ages
                .iter()
                .map(|&age| {
                    let drawn = self.rng.random_bool(p_active);
                    drawn || age > max_delay
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Prosumers whose fresh update reached the operator.
    pub active: usize,
    pub missed: usize,
    pub rho: f64,
    pub primal: f64,
    pub dual: f64,
    /// Movement of the auxiliaries, `‖ρ·(p̃(k) - p̃(k-1))‖₂`.
    pub aux_step: f64,
    /// Total cost of the latest schedules held by the prosumers.
    pub objective: f64,
    /// Age of the oldest update consumed by the operator.
    pub max_age: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsumerCost {
    pub id: usize,
    pub schedule: f64,
    pub trading: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub decisions: Vec<ScheduleDecision>,
    pub signals: Vec<CouplingSignals>,
    pub network: NetworkState,
    pub objective: f64,
    pub costs: Vec<ProsumerCost>,
}

pub fn prosumer_costs(
    scenario: &Scenario,
    decisions: &[ScheduleDecision],
) -> Result<Vec<ProsumerCost>> {
    scenario
        .prosumers
        .iter()
        .zip(decisions)
        .map(|(p, d)| {
            let schedule = evaluate_schedule_cost(d, p);
            let trading = evaluate_trading_cost(&d.trade, &scenario.prices)?;
            Ok(ProsumerCost {
                id: p.id,
                schedule,
                trading,
                total: schedule + trading,
            })
        })
        .collect()
}

/// Mutable run state, exposed for instrumentation and stepping.
pub struct Coordinator<'a> {
    scenario: &'a Scenario,
    config: RunConfig,
    settings: SolverSettings,
    pub agents: Vec<ProsumerAgent>,
    pub operator: OperatorState,
    sampler: ActivationSampler,
    k: usize,
    trace: Vec<IterationRecord>,
    reported: Vec<bool>,
    parallel: bool,
}

impl<'a> Coordinator<'a> {
    pub fn new(scenario: &'a Scenario, config: RunConfig) -> Result<Self> {
        config.validate()?;
        scenario.validate()?;
        let h = scenario.grid.horizon;
        let rho = config.stepsize.rho(1);
        let agents = scenario
            .prosumers
            .iter()
            .enumerate()
            .map(|(i, p)| ProsumerAgent::new(i, p.clone(), scenario.prices.clone(), rho))
            .collect();
        let n = scenario.prosumers.len();
        Ok(Self {
            scenario,
            config,
            settings: config.solver_settings(),
            agents,
            operator: OperatorState::new(n, h, rho),
            sampler: ActivationSampler::new(config.effective_activation(), config.seed),
            k: 0,
            trace: Vec::new(),
            reported: vec![false; n],
            parallel: true,
        })
    }

    /// Solve agent subproblems on the calling thread only.
    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn trace(&self) -> &[IterationRecord] {
        &self.trace
    }

    /// Draws the next active set and runs one iteration.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let ages = self.operator.ages(self.k + 1);
        let active = self.sampler.draw(&ages);
        self.step_with(&active)
    }

    /// Runs one iteration with an explicit active set.
    pub fn step_with(&mut self, active: &[bool]) -> Result<IterationRecord> {
        let k = self.k + 1;
        let rho = self.config.stepsize.rho(k);
        self.operator.set_rho(rho);
        for (agent, &on) in self.agents.iter_mut().zip(active) {
            if on {
                agent.receive(self.operator.signals[agent.id].clone());
            }
        }

        let settings = &self.settings;
        let solve = |(agent, &on): (&mut ProsumerAgent, &bool)| -> Option<Result<AgentUpdate>> {
            on.then(|| agent.solve(k, settings))
        };
        let outcomes: Vec<Option<Result<AgentUpdate>>> = if self.parallel {
            self.agents
                .par_iter_mut()
                .zip(active.par_iter())
                .map(solve)
                .collect()
        } else {
            self.agents
                .iter_mut()
                .zip(active.iter())
                .map(solve)
                .collect()
        };

        let (mut fresh, mut missed) = (0, 0);
        for (i, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                None => {}
                Some(Ok(update)) => {
                    self.operator.receive(update);
                    self.reported[i] = true;
                    fresh += 1;
                }
                Some(Err(CoreError::NotConverged { .. })) => missed += 1,
                Some(Err(e)) => return Err(e),
            }
        }

        let max_age = self.operator.ages(k).into_iter().max().unwrap_or(0);
        let q_load: Vec<&[f64]> = self
            .scenario
            .prosumers
            .iter()
            .map(|p| p.reactive_load.as_slice())
            .collect();
        let (primal, dual) = self
            .operator
            .iterate(&self.scenario.network, &q_load, settings)?;
        self.k = k;
        let record = IterationRecord {
            k,
            active: fresh,
            missed,
            rho,
            primal,
            dual,
            aux_step: self.operator.aux_step,
            objective: self.current_objective(),
            max_age,
        };
        self.trace.push(record.clone());
        Ok(record)
    }

    fn current_objective(&self) -> f64 {
        self.agents
            .iter()
            .filter_map(|a| {
                let d = a.decision.as_ref()?;
                let trade = evaluate_trading_cost(&d.trade, &a.prices).ok()?;
                Some(evaluate_schedule_cost(d, &a.params) + trade)
            })
            .sum()
    }

    /// Converged once every prosumer has reported at least once, the
    /// latest residuals are below both thresholds and the auxiliaries have
    /// stopped moving (within the dual threshold). Without the last check a
    /// run stops as soon as the operator can adopt the updates unchanged,
    /// however far they are from optimal.
    pub fn converged(&self) -> bool {
        let Some(last) = self.trace.last() else {
            return false;
        };
        self.reported.iter().all(|&r| r)
            && check_convergence(
                last.primal,
                last.dual,
                self.config.eps_primal,
                self.config.eps_dual,
            )
            && last.aux_step <= self.config.eps_dual
    }

    pub fn run(mut self) -> Result<RunResult> {
        while self.k < self.config.max_iter {
            self.step()?;
            if self.converged() {
                break;
            }
        }
        self.finish()
    }

    pub fn finish(self) -> Result<RunResult> {
        let converged = self.converged();
        let decisions: Vec<ScheduleDecision> = self
            .agents
            .iter()
            .map(|a| {
                a.decision
                    .clone()
                    .unwrap_or_else(|| ScheduleDecision::idle(&a.params))
            })
            .collect();
        let costs = prosumer_costs(self.scenario, &decisions)?;
        Ok(RunResult {
            iterations: self.k,
            converged,
            trace: self.trace,
            objective: costs.iter().map(|c| c.total).sum(),
            costs,
            decisions,
            signals: self.operator.signals,
            network: self.operator.network,
        })
    }
}

/// Runs the loop to convergence or the iteration cap.
pub fn run(scenario: &Scenario, config: RunConfig) -> Result<RunResult> {
    Coordinator::new(scenario, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_guard() {
        assert!(check_convergence(0.005, 0.005, 1e-2, 1e-2));
        assert!(!check_convergence(0.02, 0.005, 1e-2, 1e-2));
        assert!(!check_convergence(0.005, 0.02, 1e-2, 1e-2));
    }

    #[test]
    fn harmonic_schedule() {
        let s = StepsizeSchedule::Harmonic { rho0: 1.0 };
        assert_eq!(s.rho(1), 1.0);
        assert_eq!(s.rho(4), 0.25);
        assert_eq!(StepsizeSchedule::Constant { rho0: 2.0 }.rho(9), 2.0);
    }

    #[test]
    fn fixed_dropout_removes_exact_share() {
        let mut s = ActivationSampler::new(ActivationModel::FixedDropout { fraction: 0.2 }, 5);
        for _ in 0..20 {
            let a = s.draw(&[0; 10]);
            assert_eq!(a.iter().filter(|&&x| !x).count(), 2);
        }
    }

    #[test]
    fn bounded_delay_forces_old_updates() {
        let mut s = ActivationSampler::new(
            ActivationModel::BoundedDelay {
                max_delay: 3,
                p_active: 0.01,
            },
            1,
        );
        let a = s.draw(&[4, 4, 4, 0]);
        assert!(a[..3].iter().all(|&x| x));
    }

    #[test]
    fn activation_validation() {
        assert!(ActivationModel::Bernoulli { p_active: 0.0 }
            .validate()
            .is_err());
        assert!(ActivationModel::FixedDropout { fraction: 1.0 }
            .validate()
            .is_err());
        assert!(ActivationModel::BoundedDelay {
            max_delay: 0,
            p_active: 0.5
        }
        .validate()
        .is_err());
        assert!(ActivationModel::default().validate().is_ok());
    }

    #[test]
    fn run_config_toml_defaults() {
        let c: RunConfig = toml::from_str("mode = \"sync\"").unwrap();
        assert_eq!(c.mode, Mode::Sync);
        assert_eq!(c.max_iter, 2000);
        assert_eq!(c.eps_primal, 1e-2);
        assert_eq!(c.stepsize, StepsizeSchedule::Harmonic { rho0: 1.0 });
    }
}
