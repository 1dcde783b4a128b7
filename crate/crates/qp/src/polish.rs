//! Active-set polishing: solve the equality-constrained QP on the guessed
//! active set with a regularized KKT factorization and iterative refinement.
//! A small proximal term toward the ADMM iterate stays in the refined system
//! so directions without curvature (LP-like blocks) remain anchored.

use crate::csc::{CscMatrix, TripletMatrix};
use crate::ldl::SparseLdl;

const DELTA: f64 = 1e-7;

pub(crate) struct PolishInput<'a> {
    pub p: &'a CscMatrix,
    pub q: &'a [f64],
    pub a: &'a CscMatrix,
    pub l: &'a [f64],
    pub u: &'a [f64],
    pub lower_active: &'a [bool],
    pub upper_active: &'a [bool],
    pub equality: &'a [bool],
    /// Proximal center, normally the current ADMM iterate.
    pub center: &'a [f64],
    pub refine_iters: usize,
}

pub(crate) struct Polished {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub(crate) fn polish(inp: PolishInput<'_>) -> Option<Polished> {
    let n = inp.q.len();
    let m = inp.l.len();
    let active: Vec<usize> = (0..m)
        .filter(|&i| inp.equality[i] || inp.lower_active[i] || inp.upper_active[i])
        .collect();
    let k = active.len();
    let rows = inp.a.transpose();

    let mut t = TripletMatrix::new(n + k, n + k);
    for (i, j, v) in inp.p.iter() {
        if i <= j {
            t.push(i, j, v);
        }
    }
    for j in 0..n {
        t.push(j, j, DELTA);
    }
    for (slot, &i) in active.iter().enumerate() {
        for pos in rows.col_ptr[i]..rows.col_ptr[i + 1] {
            t.push(rows.row_idx[pos], n + slot, rows.values[pos]);
        }
        t.push(n + slot, n + slot, -DELTA);
    }
    let mut ldl = SparseLdl::new(&t.to_csc()).ok()?;

    let mut rhs = vec![0.0; n + k];
    for j in 0..n {
        rhs[j] = -inp.q[j] + DELTA * inp.center[j];
    }
    for (slot, &i) in active.iter().enumerate() {
        rhs[n + slot] = if inp.equality[i] || inp.lower_active[i] {
            inp.l[i]
        } else {
            inp.u[i]
        };
    }
    let mut sol = rhs.clone();
    ldl.solve(&mut sol);

    let rhs_norm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut px = vec![0.0; n];
    let mut resid = vec![0.0; n + k];
    for _ in 0..inp.refine_iters {
        // resid = rhs - [P+δI Aᵀ; A 0] sol
        inp.p.mul_vec(&sol[..n], &mut px);
        for j in 0..n {
            resid[j] = rhs[j] - px[j] - DELTA * sol[j];
        }
        for (slot, &i) in active.iter().enumerate() {
            let ys = sol[n + slot];
            let mut ax = 0.0;
            for pos in rows.col_ptr[i]..rows.col_ptr[i + 1] {
                let j = rows.row_idx[pos];
                resid[j] -= rows.values[pos] * ys;
                ax += rows.values[pos] * sol[j];
            }
            resid[n + slot] = rhs[n + slot] - ax;
        }
        if resid.iter().fold(0.0f64, |a, v| a.max(v.abs())) <= 1e-15 * (1.0 + rhs_norm) {
            break;
        }
        ldl.solve(&mut resid);
        for (s, r) in sol.iter_mut().zip(&resid) {
            *s += r;
        }
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut y = vec![0.0; m];
    for (slot, &i) in active.iter().enumerate() {
        y[i] = sol[n + slot];
    }
    Some(Polished {
        x: sol[..n].to_vec(),
        y,
    })
}
