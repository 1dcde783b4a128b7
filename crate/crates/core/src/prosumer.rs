//! Prosumer-side subproblem. Each agent minimizes its own scheduling and
//! trading cost plus the augmented-Lagrangian terms coupling its trade and
//! net-load vectors to the operator's auxiliary copies. Only those two
//! vectors ever leave the agent.

use peergrid_qp::{solve_warm, QpStatus, SolverSettings};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, ModelError, Result};
use crate::formulation::{
    add_prosumer_block, add_proximal, add_trade_cost, extract_decision, ProsumerVars, QpBuilder,
};
use crate::model::{ProsumerParams, ScheduleDecision};
use crate::network::diagnose_infeasibility;

/// Operator-held values broadcast to one prosumer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSignals {
    pub aux_trade: Vec<f64>,
    pub aux_net: Vec<f64>,
    pub dual_trade: Vec<f64>,
    pub dual_net: Vec<f64>,
    pub rho_trade: f64,
    pub rho_net: f64,
}

impl CouplingSignals {
    pub fn zero(horizon: usize, rho: f64) -> Self {
        Self {
            aux_trade: vec![0.0; horizon],
            aux_net: vec![0.0; horizon],
            dual_trade: vec![0.0; horizon],
            dual_net: vec![0.0; horizon],
            rho_trade: rho,
            rho_net: rho,
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<(), ModelError> {
        for (field, v) in [
            ("aux_trade", &self.aux_trade),
            ("aux_net", &self.aux_net),
            ("dual_trade", &self.dual_trade),
            ("dual_net", &self.dual_net),
        ] {
            if v.len() != horizon {
                return Err(ModelError::Dimension {
                    field,
                    expected: horizon,
                    got: v.len(),
                });
            }
        }
        if !(self.rho_trade > 0.0 && self.rho_net > 0.0) {
            return Err(ModelError::Invalid(
                "penalty parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The message an agent sends to the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentUpdate {
    pub id: usize,
    pub k: usize,
    pub p_trade: Vec<f64>,
    pub p_net: Vec<f64>,
}

impl AgentUpdate {
    pub fn zero(id: usize, horizon: usize) -> Self {
        Self {
            id,
            k: 0,
            p_trade: vec![0.0; horizon],
            p_net: vec![0.0; horizon],
        }
    }
}

/// Builds the prosumer subproblem
/// `C_sch + C_trade - λ_tradeᵀp_trade + (ρ/2)‖p̃_trade - p_trade‖² - λ_netᵀp_net + (ρ/2)‖p̃_net - p_net‖²`.
pub fn build_lp(
    params: &ProsumerParams,
    prices: &[f64],
    sig: &CouplingSignals,
) -> Result<(QpBuilder, ProsumerVars)> {
    let h = params.horizon();
    params.validate(h)?;
    sig.validate(h)?;
    if prices.len() != h {
        return Err(ModelError::Dimension {
            field: "trade prices",
            expected: h,
            got: prices.len(),
        }
        .into());
    }
    let mut b = QpBuilder::new();
    let vars = add_prosumer_block(&mut b, params, true);
    add_trade_cost(&mut b, &vars, prices);
    add_proximal(
        &mut b,
        vars.trade,
        &sig.dual_trade,
        -1.0,
        &sig.aux_trade,
        sig.rho_trade,
    );
    add_proximal(
        &mut b,
        vars.net,
        &sig.dual_net,
        -1.0,
        &sig.aux_net,
        sig.rho_net,
    );
    Ok((b, vars))
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub decision: ScheduleDecision,
    pub update: AgentUpdate,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
}

/// Solves the subproblem. A solver that runs out of iterations yields
/// [`CoreError::NotConverged`]; callers treat that as a missed update.
pub fn solve_lp(
    id: usize,
    k: usize,
    params: &ProsumerParams,
    prices: &[f64],
    sig: &CouplingSignals,
    settings: &SolverSettings,
    warm: Option<(&[f64], &[f64])>,
) -> Result<LpSolution> {
    let (b, vars) = build_lp(params, prices, sig)?;
    let qp = b.build()?;
    let warm = warm.filter(|(x, y)| x.len() == qp.num_vars() && y.len() == qp.num_constraints());
    let sol = solve_warm(&qp, settings, warm.map(|w| w.0), warm.map(|w| w.1))?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::PrimalInfeasible => {
            return Err(CoreError::Infeasible {
                context: format!("prosumer {id} subproblem"),
                family: diagnose_infeasibility(&b, settings),
            })
        }
        QpStatus::MaxIterations => {
            return Err(CoreError::NotConverged {
                context: format!("prosumer {id} subproblem"),
                iterations: sol.iterations,
            })
        }
    }
    let decision = extract_decision(&sol.x, &vars, params)?;
    let update = AgentUpdate {
        id,
        k,
        p_trade: decision.trade.clone(),
        p_net: decision.net.clone(),
    };
    Ok(LpSolution {
        decision,
        update,
        x: sol.x,
        y: sol.y,
        iterations: sol.iterations,
    })
}

/// One prosumer: private parameters, the last signals it received and its
/// solver warm start.
#[derive(Debug, Clone)]
pub struct ProsumerAgent {
    pub id: usize,
    pub params: ProsumerParams,
    pub prices: Vec<f64>,
    pub signals: CouplingSignals,
    pub decision: Option<ScheduleDecision>,
    pub last_update: Option<AgentUpdate>,
    warm: Option<(Vec<f64>, Vec<f64>)>,
}

impl ProsumerAgent {
    pub fn new(id: usize, params: ProsumerParams, prices: Vec<f64>, rho: f64) -> Self {
        let h = params.horizon();
        Self {
            id,
            params,
            prices,
            signals: CouplingSignals::zero(h, rho),
            decision: None,
            last_update: None,
            warm: None,
        }
    }

    pub fn receive(&mut self, signals: CouplingSignals) {
        self.signals = signals;
    }

    /// Solves with the held signals; on success stores the schedule and
    /// returns the update to send.
    pub fn solve(&mut self, k: usize, settings: &SolverSettings) -> Result<AgentUpdate> {
        let warm = self
            .warm
            .as_ref()
            .map(|(x, y)| (x.as_slice(), y.as_slice()));
        let sol = solve_lp(
            self.id,
            k,
            &self.params,
            &self.prices,
            &self.signals,
            settings,
            warm,
        )?;
        self.warm = Some((sol.x, sol.y));
        self.decision = Some(sol.decision);
        self.last_update = Some(sol.update.clone());
        Ok(sol.update)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::params;
    use crate::model::{check_feasibility, evaluate_schedule_cost};

    #[test]
    fn variable_count() {
        let p = params(24);
        let (b, _) = build_lp(&p, &[0.125; 24], &CouplingSignals::zero(24, 1.0)).unwrap();
        assert_eq!(b.num_vars(), 8 * 24 + 24 + 24 + 1);
    }

    #[test]
    fn heavy_penalty_pins_coupling() {
        let mut p = params(6);
        p.base_load = vec![0.0; 6];
        let sig = CouplingSignals::zero(6, 1e4);
        let sol = solve_lp(
            0,
            1,
            &p,
            &[0.125; 6],
            &sig,
            &SolverSettings::default(),
            None,
        )
        .unwrap();
        for v in sol.update.p_trade.iter().chain(&sol.update.p_net) {
            assert!(v.abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn epigraph_and_slacks_are_tight() {
        let mut p = params(8);
        p.base_load = (0..8).map(|t| 0.5 + 0.2 * t as f64).collect();
        p.outdoor_temp = (0..8).map(|t| 26.0 + t as f64).collect();
        let sig = CouplingSignals::zero(8, 0.5);
        let (b, vars) = build_lp(&p, &[0.125; 8], &sig).unwrap();
        let qp = b.build().unwrap();
        let sol = peergrid_qp::solve(&qp, &SolverSettings::default()).unwrap();
        assert!(sol.is_optimal());
        let peak = sol.x[vars.peak];
        let grid_max = (0..8).map(|t| sol.x[vars.grid + t]).fold(0.0f64, f64::max);
        assert!((peak - grid_max).abs() < 1e-6);
        for t in 0..8 {
            let dev = (sol.x[vars.temp + t] - p.temp_ref[t]).abs();
            assert!((sol.x[vars.slack + t] - dev).abs() < 1e-6);
        }
        let d = extract_decision(&sol.x, &vars, &p).unwrap();
        assert!(check_feasibility(&d, &p, 1e-5).unwrap().is_feasible());
        assert!(evaluate_schedule_cost(&d, &p).is_finite());
    }

    #[test]
    fn update_carries_only_coupling_vectors() {
        let u = AgentUpdate::zero(3, 2);
        let json = serde_json::to_value(&u).unwrap();
        let mut keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(|s| s.as_str())
            .collect();
        keys.sort_unstable();
        assert_eq!(keys, ["id", "k", "p_net", "p_trade"]);
    }
}
