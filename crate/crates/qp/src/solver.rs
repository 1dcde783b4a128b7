use crate::csc::{CscMatrix, TripletMatrix};
use crate::ldl::{LdlError, SparseLdl};
use crate::polish::{polish, PolishInput};
use crate::scaling::{equilibrate, Scaling};

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const RHO_EQ_FACTOR: f64 = 1e3;
const RHO_ADAPT_TRIGGER: f64 = 5.0;
/// Re-tuning rho every check makes ADMM thrash on degenerate problems.
const RHO_ADAPT_INTERVAL: usize = 100;
const MAX_POLISH_ROUNDS: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QpError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("cost matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("row {row}: lower bound {lower} exceeds upper bound {upper}")]
    InvertedBounds { row: usize, lower: f64, upper: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid settings: {0}")]
    Settings(&'static str),
    #[error("KKT factorization failed: {0}")]
    Factorization(#[from] LdlError),
}

/// Sparse convex QP `min ½xᵀPx + qᵀx  s.t. l ≤ Ax ≤ u`.
///
/// `p` holds the full symmetric matrix (both triangles).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub p: CscMatrix,
    pub q: Vec<f64>,
    pub a: CscMatrix,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
}

impl QuadraticProgram {
    pub fn new(
        p: CscMatrix,
        q: Vec<f64>,
        a: CscMatrix,
        l: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self, QpError> {
        let qp = Self { p, q, a, l, u };
        qp.validate()?;
        Ok(qp)
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.l.len()
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.q.len();
        let m = self.l.len();
        let dim = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(QpError::Dimension {
                    what,
                    expected,
                    got,
                })
            }
        };
        dim("P rows", n, self.p.nrows)?;
        dim("P cols", n, self.p.ncols)?;
        dim("A cols", n, self.a.ncols)?;
        dim("A rows", m, self.a.nrows)?;
        dim("upper bounds", m, self.u.len())?;
        if self.q.iter().any(|v| !v.is_finite()) {
            return Err(QpError::NonFinite("q"));
        }
        if self.p.values.iter().any(|v| !v.is_finite()) {
            return Err(QpError::NonFinite("P"));
        }
        if self.a.values.iter().any(|v| !v.is_finite()) {
            return Err(QpError::NonFinite("A"));
        }
        if self.l.iter().chain(&self.u).any(|v| v.is_nan()) {
            return Err(QpError::NonFinite("bounds"));
        }
        let asym = self.p.asymmetry();
        if asym > 1e-12 {
            return Err(QpError::NotSymmetric(asym));
        }
        for (row, (&lower, &upper)) in self.l.iter().zip(&self.u).enumerate() {
            if lower > upper {
                return Err(QpError::InvertedBounds { row, lower, upper });
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut px = vec![0.0; self.num_vars()];
        self.p.mul_vec(x, &mut px);
        x.iter()
            .zip(&px)
            .zip(&self.q)
            .map(|((xi, pxi), qi)| 0.5 * xi * pxi + qi * xi)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation factor in (0, 2).
    pub alpha: f64,
    pub adaptive_rho: bool,
    pub scaling_iters: usize,
    pub polish: bool,
    pub polish_refine_iters: usize,
    /// Residuals are evaluated every `check_interval` iterations.
    pub check_interval: usize,
    pub prim_inf_tol: f64,
    /// Use hints passed to [`QpSolver::warm_start`].
    pub warm_start: bool,
    /// Record the combined residual at every check.
    pub record_history: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_iter: 20_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            adaptive_rho: true,
            scaling_iters: 10,
            polish: true,
            polish_refine_iters: 50,
            check_interval: 5,
            prim_inf_tol: 1e-5,
            warm_start: true,
            record_history: false,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<(), QpError> {
        if !(self.abs_tol > 0.0 && self.rel_tol >= 0.0) {
            return Err(QpError::Settings("tolerances must be positive"));
        }
        if !(self.rho > 0.0 && self.sigma > 0.0) {
            return Err(QpError::Settings("rho and sigma must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(QpError::Settings("alpha must lie in (0, 2)"));
        }
        if self.max_iter == 0 || self.check_interval == 0 {
            return Err(QpError::Settings(
                "max_iter and check_interval must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QpStatus {
    Optimal,
    MaxIterations,
    PrimalInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Multipliers with the convention `Px + q + Aᵀy = 0`; `y_i > 0` marks an
    /// active upper bound and `y_i < 0` an active lower bound.
    pub y: Vec<f64>,
    pub status: QpStatus,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub polished: bool,
    pub objective: f64,
    /// Combined residual `max(prim, dual)` at each check, when recorded.
    pub residual_history: Vec<f64>,
}

impl QpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == QpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Inequality,
    Equality,
    Free,
}

/// Residuals and norms of an iterate, measured on the unscaled problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Residuals {
    pub prim: f64,
    pub dual: f64,
    pub eps_prim: f64,
    pub eps_dual: f64,
    pub prim_norm: f64,
    pub dual_norm: f64,
    // scaled, normalized residuals for penalty adaptation
    pub prim_scaled_rel: f64,
    pub dual_scaled_rel: f64,
}

impl Residuals {
    fn converged(&self) -> bool {
        self.prim <= self.eps_prim && self.dual <= self.eps_dual
    }
}

/// Solver workspace bound to a single problem.
#[derive(Debug, Clone)]
pub struct QpSolver {
    settings: SolverSettings,
    original: QuadraticProgram,
    // scaled data
    p: CscMatrix,
    q: Vec<f64>,
    a: CscMatrix,
    l: Vec<f64>,
    u: Vec<f64>,
    scaling: Scaling,
    kinds: Vec<RowKind>,
    rho_base: f64,
    rho: Vec<f64>,
    rho_diag_index: Vec<usize>,
    kkt: SparseLdl,
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

impl QpSolver {
    pub fn new(qp: &QuadraticProgram, settings: SolverSettings) -> Result<Self, QpError> {
        qp.validate()?;
        settings.validate()?;
        let (n, m) = (qp.num_vars(), qp.num_constraints());
        let mut p = qp.p.clone();
        let mut q = qp.q.clone();
        let mut a = qp.a.clone();
        let mut l = qp.l.clone();
        let mut u = qp.u.clone();
        let scaling = equilibrate(
            &mut p,
            &mut q,
            &mut a,
            &mut l,
            &mut u,
            settings.scaling_iters,
        );

        let kinds: Vec<RowKind> = l
            .iter()
            .zip(&u)
            .map(|(&lo, &hi)| {
                if lo.is_infinite() && hi.is_infinite() {
                    RowKind::Free
                } else if lo.is_finite()
                    && hi.is_finite()
                    && hi - lo <= 1e-10 * (1.0 + lo.abs().max(hi.abs()))
                {
                    RowKind::Equality
                } else {
                    RowKind::Inequality
                }
            })
            .collect();
        let rho_base = settings.rho;
        let rho: Vec<f64> = kinds.iter().map(|&k| rho_for(k, rho_base)).collect();

        // upper triangle of [P + σI, Aᵀ; A, -diag(1/ρ)]
        let mut t = TripletMatrix::new(n + m, n + m);
        for (i, j, v) in p.iter() {
            if i <= j {
                t.push(i, j, v);
            }
        }
        for j in 0..n {
            t.push(j, j, settings.sigma);
        }
        for (i, j, v) in a.iter() {
            t.push(j, n + i, v);
        }
        for i in 0..m {
            t.push(n + i, n + i, -1.0 / rho[i]);
        }
        let kkt_mat = t.to_csc();
        // the diagonal is the last entry of each sorted column
        let rho_diag_index: Vec<usize> = (0..m).map(|i| kkt_mat.col_ptr[n + i + 1] - 1).collect();
        let kkt = SparseLdl::new(&kkt_mat)?;

        Ok(Self {
            settings,
            original: qp.clone(),
            p,
            q,
            a,
            l,
            u,
            scaling,
            kinds,
            rho_base,
            rho,
            rho_diag_index,
            kkt,
            x: vec![0.0; n],
            z: vec![0.0; m],
            y: vec![0.0; m],
        })
    }

    /// Seeds the iterate with a primal/dual guess in unscaled coordinates.
    pub fn warm_start(&mut self, x: Option<&[f64]>, y: Option<&[f64]>) -> Result<(), QpError> {
        let (n, m) = (self.x.len(), self.y.len());
        if let Some(x) = x {
            if x.len() != n {
                return Err(QpError::Dimension {
                    what: "warm-start x",
                    expected: n,
                    got: x.len(),
                });
            }
            for j in 0..n {
                self.x[j] = x[j] / self.scaling.d[j];
            }
            let mut ax = vec![0.0; m];
            self.a.mul_vec(&self.x, &mut ax);
            for i in 0..m {
                self.z[i] = ax[i].clamp(self.l[i], self.u[i]);
            }
        }
        if let Some(y) = y {
            if y.len() != m {
                return Err(QpError::Dimension {
                    what: "warm-start y",
                    expected: m,
                    got: y.len(),
                });
            }
            for i in 0..m {
                self.y[i] = y[i] * self.scaling.c / self.scaling.e[i];
            }
        }
        Ok(())
    }

    pub fn solve(&mut self) -> Result<QpSolution, QpError> {
        let (n, m) = (self.x.len(), self.y.len());
        let s = self.settings.clone();
        let mut rhs = vec![0.0; n + m];
        let mut x_prev = vec![0.0; n];
        let mut y_prev = vec![0.0; m];
        let mut history = Vec::new();
        let mut next_polish = 0usize;
        let mut polish_gap = 25usize;
        let loose = 1e-4f64.max(1e4 * s.abs_tol);
        let mut last_res: Option<Residuals> = None;

        for iter in 1..=s.max_iter {
            x_prev.copy_from_slice(&self.x);
            y_prev.copy_from_slice(&self.y);

            for j in 0..n {
                rhs[j] = s.sigma * self.x[j] - self.q[j];
            }
            for i in 0..m {
                rhs[n + i] = self.z[i] - self.y[i] / self.rho[i];
            }
            self.kkt.solve(&mut rhs);
            for j in 0..n {
                self.x[j] = s.alpha * rhs[j] + (1.0 - s.alpha) * x_prev[j];
            }
            for i in 0..m {
                let z_tilde = self.z[i] + (rhs[n + i] - self.y[i]) / self.rho[i];
                let z_relaxed = s.alpha * z_tilde + (1.0 - s.alpha) * self.z[i];
                let z_new = (z_relaxed + self.y[i] / self.rho[i]).clamp(self.l[i], self.u[i]);
                self.y[i] += self.rho[i] * (z_relaxed - z_new);
                self.z[i] = z_new;
            }

            if iter % s.check_interval != 0 && iter != s.max_iter {
                continue;
            }
            let res = self.residuals();
            if s.record_history {
                history.push(res.prim.max(res.dual));
            }
            last_res = Some(res);

            if res.converged() {
                let mut sol = self.finish(QpStatus::Optimal, iter, res, history);
                if s.polish {
                    if let Some(p) = self.try_polish() {
                        sol.x = p.0;
                        sol.y = p.1;
                        sol.primal_residual = p.2.prim;
                        sol.dual_residual = p.2.dual;
                        sol.polished = true;
                        sol.objective = self.original.objective(&sol.x);
                    }
                }
                return Ok(sol);
            }
            if s.polish
                && iter >= next_polish
                && res.prim <= loose * (1.0 + res.prim_norm)
                && res.dual <= loose * (1.0 + res.dual_norm)
            {
                if let Some((x, y, pres)) = self.try_polish() {
                    let mut sol = self.finish(QpStatus::Optimal, iter, pres, history);
                    sol.objective = self.original.objective(&x);
                    sol.x = x;
                    sol.y = y;
                    sol.polished = true;
                    return Ok(sol);
                }
                next_polish = iter + polish_gap;
                polish_gap = (polish_gap * 2).min(400);
            }
            if self.primal_infeasible(&y_prev) {
                return Ok(self.finish(QpStatus::PrimalInfeasible, iter, res, history));
            }
            if s.adaptive_rho && m > 0 && iter % RHO_ADAPT_INTERVAL == 0 {
                self.adapt_rho(&res)?;
            }
        }

        let res = last_res.unwrap_or_else(|| self.residuals());
        if s.polish {
            if let Some((x, y, pres)) = self.try_polish() {
                let mut sol = self.finish(QpStatus::Optimal, s.max_iter, pres, history);
                sol.objective = self.original.objective(&x);
                sol.x = x;
                sol.y = y;
                sol.polished = true;
                return Ok(sol);
            }
        }
        Ok(self.finish(QpStatus::MaxIterations, s.max_iter, res, history))
    }

    fn finish(
        &self,
        status: QpStatus,
        iterations: usize,
        res: Residuals,
        history: Vec<f64>,
    ) -> QpSolution {
        let (x, y) = self.unscaled_xy();
        QpSolution {
            objective: self.original.objective(&x),
            x,
            y,
            status,
            primal_residual: res.prim,
            dual_residual: res.dual,
            iterations,
            polished: false,
            residual_history: history,
        }
    }

    fn unscaled_xy(&self) -> (Vec<f64>, Vec<f64>) {
        let x = self
            .x
            .iter()
            .zip(&self.scaling.d)
            .map(|(v, d)| v * d)
            .collect();
        let y = self
            .y
            .iter()
            .zip(&self.scaling.e)
            .map(|(v, e)| v * e / self.scaling.c)
            .collect();
        (x, y)
    }

    fn residuals(&self) -> Residuals {
        let (n, m) = (self.x.len(), self.y.len());
        let sc = &self.scaling;
        let mut ax = vec![0.0; m];
        self.a.mul_vec(&self.x, &mut ax);
        let mut px = vec![0.0; n];
        self.p.mul_vec(&self.x, &mut px);
        let mut aty = vec![0.0; n];
        self.a.tr_mul_vec(&self.y, &mut aty);

        let inf = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, |acc, x| acc.max(x.abs()));

        let prim = inf(&mut (0..m).map(|i| (ax[i] - self.z[i]) / sc.e[i]));
        let ax_norm = inf(&mut (0..m).map(|i| ax[i] / sc.e[i]));
        let z_norm = inf(&mut (0..m).map(|i| self.z[i] / sc.e[i]));
        let cinv = 1.0 / sc.c;
        let dual = inf(&mut (0..n).map(|j| cinv * (px[j] + self.q[j] + aty[j]) / sc.d[j]));
        let px_norm = inf(&mut (0..n).map(|j| cinv * px[j] / sc.d[j]));
        let aty_norm = inf(&mut (0..n).map(|j| cinv * aty[j] / sc.d[j]));
        let q_norm = inf(&mut (0..n).map(|j| cinv * self.q[j] / sc.d[j]));

        let eps_prim = self.settings.abs_tol + self.settings.rel_tol * ax_norm.max(z_norm);
        let eps_dual =
            self.settings.abs_tol + self.settings.rel_tol * px_norm.max(aty_norm).max(q_norm);

        let prim_s = inf(&mut (0..m).map(|i| ax[i] - self.z[i]));
        let prim_norm_s = inf(&mut ax.iter().copied()).max(inf(&mut self.z.iter().copied()));
        let dual_s = inf(&mut (0..n).map(|j| px[j] + self.q[j] + aty[j]));
        let dual_norm_s = inf(&mut px.iter().copied())
            .max(inf(&mut aty.iter().copied()))
            .max(inf(&mut self.q.iter().copied()));
        Residuals {
            prim,
            dual,
            eps_prim,
            eps_dual,
            prim_norm: ax_norm.max(z_norm),
            dual_norm: px_norm.max(aty_norm).max(q_norm),
            prim_scaled_rel: prim_s / prim_norm_s.max(1e-10),
            dual_scaled_rel: dual_s / dual_norm_s.max(1e-10),
        }
    }

    fn adapt_rho(&mut self, res: &Residuals) -> Result<(), QpError> {
        let ratio = (res.prim_scaled_rel / res.dual_scaled_rel.max(1e-30)).sqrt();
        let new_rho = (self.rho_base * ratio).clamp(RHO_MIN, RHO_MAX);
        if !new_rho.is_finite()
            || (new_rho < RHO_ADAPT_TRIGGER * self.rho_base
                && new_rho > self.rho_base / RHO_ADAPT_TRIGGER)
        {
            return Ok(());
        }
        self.rho_base = new_rho;
        for (i, &kind) in self.kinds.iter().enumerate() {
            self.rho[i] = rho_for(kind, new_rho);
            self.kkt
                .set_value(self.rho_diag_index[i], -1.0 / self.rho[i]);
        }
        self.kkt.factor()?;
        Ok(())
    }

    fn primal_infeasible(&self, y_prev: &[f64]) -> bool {
        let m = self.y.len();
        if m == 0 {
            return false;
        }
        let sc = &self.scaling;
        // work on the unscaled certificate δy = E δȳ / c
        let dy: Vec<f64> = (0..m)
            .map(|i| (self.y[i] - y_prev[i]) * sc.e[i] / sc.c)
            .collect();
        let dy_norm = dy.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if dy_norm < 1e-12 {
            return false;
        }
        let tol = self.settings.prim_inf_tol * dy_norm;
        let mut support = 0.0;
        for i in 0..m {
            let (lo, hi) = (self.original.l[i], self.original.u[i]);
            if dy[i] > 0.0 {
                if hi.is_infinite() {
                    if dy[i] > tol {
                        return false;
                    }
                } else {
                    support += hi * dy[i];
                }
            } else if dy[i] < 0.0 {
                if lo.is_infinite() {
                    if -dy[i] > tol {
                        return false;
                    }
                } else {
                    support += lo * dy[i];
                }
            }
        }
        if support >= -tol {
            return false;
        }
        let mut aty = vec![0.0; self.x.len()];
        self.original.a.tr_mul_vec(&dy, &mut aty);
        aty.iter().all(|v| v.abs() <= tol)
    }

    fn try_polish(&self) -> Option<(Vec<f64>, Vec<f64>, Residuals)> {
        let m = self.y.len();
        let equality: Vec<bool> = self.kinds.iter().map(|&k| k == RowKind::Equality).collect();
        let mut lower: Vec<bool> = (0..m)
            .map(|i| !equality[i] && self.z[i] - self.l[i] < -self.y[i])
            .collect();
        let mut upper: Vec<bool> = (0..m)
            .map(|i| !equality[i] && self.u[i] - self.z[i] < self.y[i])
            .collect();
        let sc = &self.scaling;
        let mut ax = vec![0.0; m];
        // The guessed active set can be too small (weakly active rows with
        // zero multipliers) or too large (wrong-signed multipliers). Add the
        // violated rows or drop the wrong-signed ones, then retry.
        for _ in 0..MAX_POLISH_ROUNDS {
            let out = polish(PolishInput {
                p: &self.p,
                q: &self.q,
                a: &self.a,
                l: &self.l,
                u: &self.u,
                lower_active: &lower,
                upper_active: &upper,
                equality: &equality,
                center: &self.x,
                refine_iters: self.settings.polish_refine_iters,
            })?;
            let x: Vec<f64> = out.x.iter().zip(&sc.d).map(|(v, d)| v * d).collect();
            let y: Vec<f64> = out.y.iter().zip(&sc.e).map(|(v, e)| v * e / sc.c).collect();
            let res = evaluate_unscaled(&self.original, &x, &y, &self.settings);
            if res.prim > res.eps_prim {
                self.original.a.mul_vec(&x, &mut ax);
                let orig = &self.original;
                let mut added = false;
                for i in 0..m {
                    if equality[i] || lower[i] || upper[i] {
                        continue;
                    }
                    if ax[i] < orig.l[i] - res.eps_prim {
                        lower[i] = true;
                        added = true;
                    } else if ax[i] > orig.u[i] + res.eps_prim {
                        upper[i] = true;
                        added = true;
                    }
                }
                if !added {
                    return None;
                }
                continue;
            }
            if !res.converged() {
                return None;
            }
            let mut dropped = false;
            for i in 0..m {
                let wrong = (lower[i] && y[i] > res.eps_dual) || (upper[i] && -y[i] > res.eps_dual);
                if wrong {
                    lower[i] = false;
                    upper[i] = false;
                    dropped = true;
                }
            }
            if !dropped {
                return Some((x, y, res));
            }
        }
        None
    }
}

fn rho_for(kind: RowKind, rho: f64) -> f64 {
    match kind {
        RowKind::Inequality => rho,
        RowKind::Equality => (rho * RHO_EQ_FACTOR).min(RHO_MAX),
        RowKind::Free => RHO_MIN,
    }
}

/// Residuals of `(x, y)` with `z = Π[l,u](Ax)`.
pub(crate) fn evaluate_unscaled(
    qp: &QuadraticProgram,
    x: &[f64],
    y: &[f64],
    s: &SolverSettings,
) -> Residuals {
    let (n, m) = (qp.num_vars(), qp.num_constraints());
    let mut ax = vec![0.0; m];
    qp.a.mul_vec(x, &mut ax);
    let mut px = vec![0.0; n];
    qp.p.mul_vec(x, &mut px);
    let mut aty = vec![0.0; n];
    qp.a.tr_mul_vec(y, &mut aty);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let z: Vec<f64> = (0..m).map(|i| ax[i].clamp(qp.l[i], qp.u[i])).collect();
    let prim = (0..m).fold(0.0f64, |acc, i| acc.max((ax[i] - z[i]).abs()));
    let dual = (0..n).fold(0.0f64, |acc, j| acc.max((px[j] + qp.q[j] + aty[j]).abs()));
    let eps_prim = s.abs_tol + s.rel_tol * inf(&ax).max(inf(&z));
    let eps_dual = s.abs_tol + s.rel_tol * inf(&px).max(inf(&aty)).max(inf(&qp.q));
    Residuals {
        prim,
        dual,
        eps_prim,
        eps_dual,
        prim_norm: inf(&ax).max(inf(&z)),
        dual_norm: inf(&px).max(inf(&aty)).max(inf(&qp.q)),
        prim_scaled_rel: 0.0,
        dual_scaled_rel: 0.0,
    }
}

/// Solves `qp` from a cold start.
pub fn solve(qp: &QuadraticProgram, settings: &SolverSettings) -> Result<QpSolution, QpError> {
    QpSolver::new(qp, settings.clone())?.solve()
}

/// Solves `qp` seeded with primal and/or dual hints.
pub fn solve_warm(
    qp: &QuadraticProgram,
    settings: &SolverSettings,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<QpSolution, QpError> {
    let mut solver = QpSolver::new(qp, settings.clone())?;
    if settings.warm_start {
        solver.warm_start(x0, y0)?;
    }
    solver.solve()
}
