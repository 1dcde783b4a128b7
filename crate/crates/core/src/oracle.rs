//! The undecomposed problem solved as one QP: every prosumer block, the
//! trading cost and the feeder model stacked together.

use peergrid_qp::{solve, QpStatus, SolverSettings};

use crate::coordinator::{prosumer_costs, ProsumerCost};
use crate::error::{CoreError, Result};
use crate::formulation::{
    add_network_block, add_prosumer_block, add_trade_cost, extract_decision, QpBuilder,
};
use crate::model::ScheduleDecision;
use crate::network::{diagnose_infeasibility, output_power, NetworkState};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub decisions: Vec<ScheduleDecision>,
    pub objective: f64,
    pub costs: Vec<ProsumerCost>,
    pub network: NetworkState,
    pub iterations: usize,
}

pub fn oracle_settings() -> SolverSettings {
    SolverSettings {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        max_iter: 100_000,
        ..SolverSettings::default()
    }
}

/// Solves the centralized problem. With `trading` off every trade is pinned
/// to zero, which gives the standalone baseline.
pub fn solve_centralized(scenario: &Scenario, trading: bool) -> Result<OracleSolution> {
    solve_centralized_with(scenario, trading, &oracle_settings())
}

pub fn solve_centralized_with(
    scenario: &Scenario,
    trading: bool,
    settings: &SolverSettings,
) -> Result<OracleSolution> {
    scenario.validate()?;
    let h = scenario.grid.horizon;
    let mut b = QpBuilder::new();
    let vars: Vec<_> = scenario
        .prosumers
        .iter()
        .map(|p| {
            let v = add_prosumer_block(&mut b, p, trading);
            add_trade_cost(&mut b, &v, &scenario.prices);
            v
        })
        .collect();
    let trade: Vec<usize> = vars.iter().map(|v| v.trade).collect();
    let net: Vec<usize> = vars.iter().map(|v| v.net).collect();
    let q_load: Vec<&[f64]> = scenario
        .prosumers
        .iter()
        .map(|p| p.reactive_load.as_slice())
        .collect();
    let network_vars = add_network_block(&mut b, &trade, &net, &scenario.network, &q_load, h);

    let qp = b.build()?;
    let sol = solve(&qp, settings)?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::PrimalInfeasible => {
            return Err(CoreError::Infeasible {
                context: "centralized problem".into(),
                family: diagnose_infeasibility(&b, settings),
            })
        }
        QpStatus::MaxIterations => {
            return Err(CoreError::NotConverged {
                context: "centralized problem".into(),
                iterations: sol.iterations,
            })
        }
    }
    let decisions = scenario
        .prosumers
        .iter()
        .zip(&vars)
        .map(|(p, v)| {
            let mut d = extract_decision(&sol.x, v, p)?;
            if !trading {
                // drop solver noise around the pinned zero
                d.trade.iter_mut().for_each(|t| *t = 0.0);
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let trades: Vec<Vec<f64>> = decisions.iter().map(|d| d.trade.clone()).collect();
    let nets: Vec<Vec<f64>> = decisions.iter().map(|d| d.net.clone()).collect();
    let network = network_vars.extract(
        &sol.x,
        output_power(&trades, &nets),
        &scenario.network.root_voltage,
    );
    let costs = prosumer_costs(scenario, &decisions)?;
    Ok(OracleSolution {
        objective: costs.iter().map(|c| c.total).sum(),
        costs,
        decisions,
        network,
        iterations: sol.iterations,
    })
}
