mod common;

use peergrid_core::model::{check_feasibility, evaluate_schedule_cost};
use peergrid_core::oracle::solve_centralized;
use peergrid_core::{ConstraintFamily, CoreError};

use common::{bundled, prosumer, rel_gap, scenario, trade_imbalance};

/// Objectives of the bundled scenarios computed by an independent conic
/// solver (Clarabel through cvxpy) on the same model: (with, without) trading.
const REFERENCE: [(&str, f64, f64); 3] = [
    ("scenario_n2", 18.698421289932625, 20.85240727037401),
    ("scenario_n10", 96.59659591408484, 108.29087091000119),
    ("scenario_symmetric", 56.71519471366515, 56.71519471338),
];

#[test]
fn matches_independent_solver_on_bundled_scenarios() {
    for (name, with, without) in REFERENCE {
        let s = bundled(name);
        let a = solve_centralized(&s, true).unwrap();
        let b = solve_centralized(&s, false).unwrap();
        assert!(
            rel_gap(a.objective, with) < 1e-7,
            "{name}: {} vs {with}",
            a.objective
        );
        assert!(
            rel_gap(b.objective, without) < 1e-7,
            "{name}: {} vs {without}",
            b.objective
        );
    }
}

#[test]
fn single_home_holding_comfort_on_two_slots() {
    // Outdoor 30 °C, start and reference 24 °C, flat 1 kW load, no battery
    // and a discomfort weight high enough that holding 24 °C pays. The
    // steady hold needs p = 6/(C·R)·C/|η| = 6/(1.35·2.5) = 16/9 kW every
    // slot, so the bill is (0.2·2 + 1.2)·(1 + 16/9) = 40/9.
    let mut p = prosumer(0, 2);
    p.base_load = vec![1.0; 2];
    p.outdoor_temp = vec![30.0; 2];
    p.charge_cap = vec![0.0; 2];
    p.discharge_cap = vec![0.0; 2];
    p.discomfort_coeff = 5.0;
    let s = scenario(vec![p], 0.1);
    let sol = solve_centralized(&s, false).unwrap();
    let d = &sol.decisions[0];
    for t in 0..2 {
        assert!((d.hvac[t] - 16.0 / 9.0).abs() < 1e-6, "{:?}", d.hvac);
        assert!((d.grid[t] - 25.0 / 9.0).abs() < 1e-6, "{:?}", d.grid);
        assert!((d.indoor_temp[t] - 24.0).abs() < 1e-6);
    }
    assert!(
        (sol.objective - 40.0 / 9.0).abs() < 1e-6,
        "{}",
        sol.objective
    );
    assert_eq!(d.trade, vec![0.0; 2]);
}

/// Total cost of the mirror pair when the surplus home ships `tau[t]` to the
/// deficit home. Payments cancel; the seller feeds in what is left of its
/// 2 kW surplus and the buyer imports what is left of its 2 kW deficit.
fn mirror_total(tau: [f64; 2]) -> f64 {
    let feedin: f64 = tau.iter().map(|t| 2.0 - t).sum();
    let import: Vec<f64> = tau.iter().map(|t| 2.0 - t).collect();
    -0.05 * feedin
        + 0.2 * import.iter().sum::<f64>()
        + 1.2 * import.iter().cloned().fold(0.0, f64::max)
}

#[test]
fn mirror_pair_gains_from_trade() {
    let mut seller = prosumer(0, 2);
    seller.solar_cap = vec![3.0; 2];
    seller.base_load = vec![1.0; 2];
    let mut buyer = prosumer(1, 2);
    buyer.base_load = vec![2.0; 2];
    for p in [&mut seller, &mut buyer] {
        p.charge_cap = vec![0.0; 2];
        p.discharge_cap = vec![0.0; 2];
    }
    let s = scenario(vec![seller, buyer], 0.125);

    let steps: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let mut best = f64::INFINITY;
    for &a in &steps {
        for &b in &steps {
            best = best.min(mirror_total([a, b]));
        }
    }
    let with = solve_centralized(&s, true).unwrap();
    let without = solve_centralized(&s, false).unwrap();
    assert!(
        (without.objective - mirror_total([0.0, 0.0])).abs() < 1e-6,
        "{}",
        without.objective
    );
    assert!(
        (with.objective - best).abs() < 1e-6,
        "{} vs grid {best}",
        with.objective
    );
    assert!(with.objective < without.objective);
    assert!(trade_imbalance(&with.decisions) < 1e-9);
}

#[test]
fn symmetric_homes_gain_nothing_from_trade() {
    let s = bundled("scenario_symmetric");
    let with = solve_centralized(&s, true).unwrap();
    let without = solve_centralized(&s, false).unwrap();
    assert!(rel_gap(with.objective, without.objective) < 1e-8);
    // the all-zero trade schedule is optimal for the trading problem too
    let zero_trade: f64 = without
        .decisions
        .iter()
        .zip(&s.prosumers)
        .map(|(d, p)| evaluate_schedule_cost(d, p))
        .sum();
    assert!((zero_trade - with.objective).abs() < 1e-6);
}

#[test]
fn oracle_schedules_are_feasible() {
    let s = bundled("scenario_n2");
    let sol = solve_centralized(&s, true).unwrap();
    for (d, p) in sol.decisions.iter().zip(&s.prosumers) {
        let report = check_feasibility(d, p, 1e-6).unwrap();
        assert!(report.is_feasible(), "{:?}", report.worst());
    }
    let q_load: Vec<Vec<f64>> = s
        .prosumers
        .iter()
        .map(|p| p.reactive_load.clone())
        .collect();
    assert!(sol.network.max_violation(&s.network, &q_load) < 1e-6);
    assert!(trade_imbalance(&sol.decisions) < 1e-9);
    let total: f64 = sol.costs.iter().map(|c| c.total).sum();
    assert!((total - sol.objective).abs() < 1e-12);
}

#[test]
fn trading_off_pins_trades_to_zero() {
    let s = bundled("scenario_n2");
    let sol = solve_centralized(&s, false).unwrap();
    assert!(sol
        .decisions
        .iter()
        .all(|d| d.trade.iter().all(|&v| v == 0.0)));
}

#[test]
fn reactive_limits_below_load_are_diagnosed() {
    let mut p = prosumer(0, 3);
    p.reactive_load = vec![1.0; 3];
    let mut s = scenario(vec![p], 0.1);
    s.network.q_min = -0.1;
    s.network.q_max = 0.1;
    let err = solve_centralized(&s, false).unwrap_err();
    assert!(
        matches!(
            err,
            CoreError::Infeasible {
                family: ConstraintFamily::ReactiveInjection,
                ..
            }
        ),
        "{err:?}"
    );
}

#[test]
fn synthetic_scenarios_are_feasible() {
    for seed in 0..20 {
        let s = peergrid_core::scenario::generate_synthetic(4, seed);
        let sol = solve_centralized(&s, true).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(trade_imbalance(&sol.decisions) < 1e-6);
    }
}
