use nalgebra::{DMatrix, DVector};
use peergrid_qp::{
    solve, solve_warm, CscMatrix, QpStatus, QuadraticProgram, SolverSettings, TripletMatrix,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Known {
    qp: QuadraticProgram,
    x: Vec<f64>,
}

/// Builds a strongly convex QP whose optimum is fixed in advance by choosing
/// the primal point, the active set and multipliers, then solving the
/// stationarity condition for `q`.
fn known_qp(rng: &mut ChaCha8Rng) -> Known {
    let n = rng.random_range(1..=10);
    let m = rng.random_range(0..=15);
    let mut mfac = DMatrix::<f64>::zeros(n, n);
    for v in mfac.iter_mut() {
        if rng.random_bool(0.5) {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    let p = mfac.transpose() * &mfac + DMatrix::identity(n, n) * rng.random_range(0.1..1.0);
    let mut a = DMatrix::<f64>::zeros(m, n);
    for v in a.iter_mut() {
        if rng.random_bool(0.4) {
            *v = rng.random_range(-2.0..2.0);
        }
    }
    let x: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
    let ax = &a * &x;
    let mut y = DVector::<f64>::zeros(m);
    let mut l = vec![0.0; m];
    let mut u = vec![0.0; m];
    for i in 0..m {
        match rng.random_range(0..5) {
            0 => {
                y[i] = -rng.random_range(0.1..2.0);
                l[i] = ax[i];
                u[i] = ax[i] + rng.random_range(0.5..3.0);
            }
            1 => {
                y[i] = rng.random_range(0.1..2.0);
                l[i] = f64::NEG_INFINITY;
                u[i] = ax[i];
            }
            2 => {
                y[i] = rng.random_range(-2.0..2.0);
                l[i] = ax[i];
                u[i] = ax[i];
            }
            _ => {
                l[i] = ax[i] - rng.random_range(0.5..3.0);
                u[i] = if rng.random_bool(0.5) {
                    ax[i] + rng.random_range(0.5..3.0)
                } else {
                    f64::INFINITY
                };
            }
        }
    }
    let q = -(&p * &x) - a.transpose() * &y;
    let to_rows = |mat: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..mat.nrows())
            .map(|i| mat.row(i).iter().copied().collect())
            .collect()
    };
    let a_csc = if m == 0 {
        CscMatrix::zeros(0, n)
    } else {
        CscMatrix::from_dense(&to_rows(&a))
    };
    let qp = QuadraticProgram::new(
        CscMatrix::from_dense(&to_rows(&p)),
        q.iter().copied().collect(),
        a_csc,
        l,
        u,
    )
    .unwrap();
    Known {
        qp,
        x: x.iter().copied().collect(),
    }
}

fn kkt_stationarity(qp: &QuadraticProgram, x: &[f64], y: &[f64]) -> f64 {
    let n = qp.num_vars();
    let mut px = vec![0.0; n];
    qp.p.mul_vec(x, &mut px);
    let mut aty = vec![0.0; n];
    qp.a.tr_mul_vec(y, &mut aty);
    (0..n).fold(0.0f64, |acc, j| acc.max((px[j] + qp.q[j] + aty[j]).abs()))
}

fn bound_violation(qp: &QuadraticProgram, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; qp.num_constraints()];
    qp.a.mul_vec(x, &mut ax);
    ax.iter()
        .zip(qp.l.iter().zip(&qp.u))
        .fold(0.0f64, |acc, (v, (lo, hi))| acc.max(lo - v).max(v - hi))
}

#[test]
fn recovers_planted_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings = SolverSettings::default();
    for case in 0..200 {
        let k = known_qp(&mut rng);
        let sol = solve(&k.qp, &settings).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal, "case {case}");
        let err = sol
            .x
            .iter()
            .zip(&k.x)
            .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        assert!(err <= 1e-6, "case {case}: error {err:e}");
        let q_norm = k.qp.q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(kkt_stationarity(&k.qp, &sol.x, &sol.y) <= 1e-6 * (1.0 + q_norm));
        assert!(bound_violation(&k.qp, &sol.x) <= 1e-6);
    }
}

#[test]
fn equality_qp_matches_dense_kkt_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(1..n);
        let mf = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let p = mf.transpose() * &mf + DMatrix::identity(n, n) * 0.5;
        let a = DMatrix::<f64>::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let q = DVector::<f64>::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let b = DVector::<f64>::from_fn(m, |_, _| rng.random_range(-2.0..2.0));

        // [P Aᵀ; A 0] [x; y] = [-q; b]
        let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(&p);
        kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
        kkt.view_mut((n, 0), (m, n)).copy_from(&a);
        let mut rhs = DVector::<f64>::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-&q));
        rhs.rows_mut(n, m).copy_from(&b);
        let direct = kkt.lu().solve(&rhs).expect("KKT invertible");

        let rows = |mat: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..mat.nrows())
                .map(|i| mat.row(i).iter().copied().collect())
                .collect()
        };
        let qp = QuadraticProgram::new(
            CscMatrix::from_dense(&rows(&p)),
            q.iter().copied().collect(),
            CscMatrix::from_dense(&rows(&a)),
            b.iter().copied().collect(),
            b.iter().copied().collect(),
        )
        .unwrap();
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert!(sol.is_optimal());
        for j in 0..n {
            assert!((sol.x[j] - direct[j]).abs() <= 1e-6);
        }
        for i in 0..m {
            assert!((sol.y[i] - direct[n + i]).abs() <= 1e-6);
        }
    }
}

#[test]
fn equality_pair_matches_grid_search() {
    // min ½(x₁² + x₂²) s.t. x₁ + x₂ = 2, parametrized along the line
    let best = (0..=4000)
        .map(|k| -2.0 + 6.0 * k as f64 / 4000.0)
        .map(|t| (t, 0.5 * (t * t + (2.0 - t) * (2.0 - t))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let qp = QuadraticProgram::new(
        CscMatrix::identity(2),
        vec![0.0, 0.0],
        CscMatrix::from_dense(&[vec![1.0, 1.0]]),
        vec![2.0],
        vec![2.0],
    )
    .unwrap();
    let sol = solve(&qp, &SolverSettings::default()).unwrap();
    assert!((sol.x[0] - best.0).abs() <= 6.0 / 4000.0);
    assert!((sol.objective - best.1).abs() <= 1e-5);
    assert!((sol.y[0] - -1.0).abs() <= 1e-9);
}

#[test]
fn residual_envelope_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let settings = SolverSettings {
        record_history: true,
        polish: false,
        ..SolverSettings::default()
    };
    for _ in 0..20 {
        let k = known_qp(&mut rng);
        let sol = solve(&k.qp, &settings).unwrap();
        let mut best = f64::INFINITY;
        let envelope: Vec<f64> = sol
            .residual_history
            .iter()
            .map(|&r| {
                best = best.min(r);
                best
            })
            .collect();
        assert!(envelope.windows(2).all(|w| w[1] <= w[0]));
        assert!(!envelope.is_empty());
    }
}

#[test]
fn warm_start_from_optimum_terminates_quickly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let settings = SolverSettings::default();
    for _ in 0..20 {
        let k = known_qp(&mut rng);
        let cold = solve(&k.qp, &settings).unwrap();
        let warm = solve_warm(&k.qp, &settings, Some(&cold.x), Some(&cold.y)).unwrap();
        assert!(warm.is_optimal());
        assert!(warm.iterations <= cold.iterations);
        let diff = warm
            .x
            .iter()
            .zip(&cold.x)
            .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        assert!(diff <= 1e-6);
    }
}

#[test]
fn sparse_chain_problem() {
    // min Σ (x_i - i)² s.t. x_{i+1} - x_i ≤ 0.5, a long banded system
    let n = 400;
    let mut p = TripletMatrix::new(n, n);
    let mut a = TripletMatrix::new(n - 1, n);
    for i in 0..n {
        p.push(i, i, 2.0);
    }
    for i in 0..n - 1 {
        a.push(i, i + 1, 1.0);
        a.push(i, i, -1.0);
    }
    let q: Vec<f64> = (0..n).map(|i| -2.0 * i as f64).collect();
    let qp = QuadraticProgram::new(
        p.to_csc(),
        q,
        a.to_csc(),
        vec![f64::NEG_INFINITY; n - 1],
        vec![0.5; n - 1],
    )
    .unwrap();
    let sol = solve(&qp, &SolverSettings::default()).unwrap();
    assert!(sol.is_optimal());
    // every increment is capped, optimum is a shifted ramp with slope 0.5
    let mean_target = (n - 1) as f64 / 2.0;
    let mean_x: f64 = sol.x.iter().sum::<f64>() / n as f64;
    assert!((mean_x - mean_target).abs() < 1e-6);
    for w in sol.x.windows(2) {
        assert!((w[1] - w[0] - 0.5).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn identical_inputs_give_bitwise_identical_output(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = known_qp(&mut rng);
        let settings = SolverSettings::default();
        let a = solve(&k.qp, &settings).unwrap();
        let b = solve(&k.qp, &settings).unwrap();
        prop_assert_eq!(a, b);
    }
}
