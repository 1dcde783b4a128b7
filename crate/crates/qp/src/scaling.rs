//! Ruiz equilibration of the KKT matrix `[P Aᵀ; A 0]` plus cost scaling.

use crate::csc::CscMatrix;

const MIN_SCALING: f64 = 1e-4;
const MAX_SCALING: f64 = 1e4;

fn clip(norm: f64) -> f64 {
    if norm < MIN_SCALING {
        1.0
    } else {
        norm.min(MAX_SCALING)
    }
}

/// Scaled variables relate to the originals by `x = D x̄`, `y = E ȳ / c`,
/// `z = E⁻¹ z̄`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub c: f64,
}

impl Scaling {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            d: vec![1.0; n],
            e: vec![1.0; m],
            c: 1.0,
        }
    }
}

/// Scales the data in place and returns the accumulated factors.
pub(crate) fn equilibrate(
    p: &mut CscMatrix,
    q: &mut [f64],
    a: &mut CscMatrix,
    l: &mut [f64],
    u: &mut [f64],
    iterations: usize,
) -> Scaling {
    let (n, m) = (p.ncols, a.nrows);
    let mut s = Scaling::identity(n, m);
    if iterations == 0 {
        return s;
    }
    let mut delta_d = vec![1.0; n];
    let mut delta_e = vec![1.0; m];
    for _ in 0..iterations {
        let p_cols = p.col_inf_norms();
        let a_cols = a.col_inf_norms();
        let a_rows = a.row_inf_norms();
        for j in 0..n {
            delta_d[j] = 1.0 / clip(p_cols[j].max(a_cols[j])).sqrt();
        }
        for i in 0..m {
            delta_e[i] = 1.0 / clip(a_rows[i]).sqrt();
        }
        p.scale(&delta_d, &delta_d);
        a.scale(&delta_e, &delta_d);
        for j in 0..n {
            q[j] *= delta_d[j];
            s.d[j] *= delta_d[j];
        }
        for i in 0..m {
            s.e[i] *= delta_e[i];
        }

        let p_cols = p.col_inf_norms();
        let mean_p = if n > 0 {
            p_cols.iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        let q_norm = q.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let gamma = 1.0 / clip(mean_p.max(q_norm));
        p.values.iter_mut().for_each(|v| *v *= gamma);
        q.iter_mut().for_each(|v| *v *= gamma);
        s.c *= gamma;
    }
    for i in 0..m {
        if l[i].is_finite() {
            l[i] *= s.e[i];
        }
        if u[i].is_finite() {
            u[i] *= s.e[i];
        }
    }
    s
}
