//! Sparse LDLᵀ factorization for quasi-definite matrices.
//!
//! The matrix is given by its upper triangle in CSC form. A fill-reducing
//! permutation is computed with approximate minimum degree, after which an
//! elimination-tree based up-looking factorization is performed without
//! pivoting. Quasi-definite matrices admit such a factorization for every
//! symmetric permutation.

use crate::csc::CscMatrix;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdlError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("entry ({0}, {1}) lies below the diagonal")]
    NotUpper(usize, usize),
    #[error("zero pivot at column {0}")]
    ZeroPivot(usize),
    #[error("ordering failed: {0}")]
    Ordering(String),
}

#[derive(Debug, Clone)]
pub struct SparseLdl {
    n: usize,
    perm: Vec<usize>,
    // permuted upper triangle; `map[k]` is the slot of original entry k
    cp: Vec<usize>,
    ci: Vec<usize>,
    cx: Vec<f64>,
    map: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    work: Vec<f64>,
}

impl SparseLdl {
    /// Symbolic analysis followed by a numeric factorization.
    pub fn new(upper: &CscMatrix) -> Result<Self, LdlError> {
        let n = upper.ncols;
        if upper.nrows != n {
            return Err(LdlError::NotSquare(upper.nrows, n));
        }
        for (i, j, _) in upper.iter() {
            if i > j {
                return Err(LdlError::NotUpper(i, j));
            }
        }
        let (perm, pinv) = if n == 0 {
            (Vec::new(), Vec::new())
        } else {
            let ap: Vec<i64> = upper.col_ptr.iter().map(|&v| v as i64).collect();
            let ai: Vec<i64> = upper.row_idx.iter().map(|&v| v as i64).collect();
            let (p, pinv, _) = amd::order::<i64>(n as i64, &ap, &ai, &amd::Control::default())
                .map_err(|s| LdlError::Ordering(format!("{s:?}")))?;
            (
                p.into_iter().map(|v| v as usize).collect::<Vec<_>>(),
                pinv.into_iter().map(|v| v as usize).collect::<Vec<_>>(),
            )
        };

        // permuted pattern
        let nnz = upper.nnz();
        let mut counts = vec![0usize; n + 1];
        let mut target = Vec::with_capacity(nnz);
        for (i, j, _) in upper.iter() {
            let (a, b) = (pinv[i], pinv[j]);
            let (r, c) = if a <= b { (a, b) } else { (b, a) };
            counts[c + 1] += 1;
            target.push((r, c));
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let cp = counts.clone();
        let mut next = counts;
        let mut ci = vec![0usize; nnz];
        let mut map = vec![0usize; nnz];
        for (k, &(r, c)) in target.iter().enumerate() {
            let slot = next[c];
            ci[slot] = r;
            map[k] = slot;
            next[c] += 1;
        }

        // elimination tree and column counts
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut mark = vec![NONE; n];
        for j in 0..n {
            mark[j] = j;
            for p in cp[j]..cp[j + 1] {
                let mut i = ci[p];
                while mark[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    mark[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];

        let mut ldl = Self {
            n,
            perm,
            cp,
            ci,
            cx: vec![0.0; nnz],
            map,
            etree,
            lp,
            li: vec![0; total],
            lx: vec![0.0; total],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
            work: vec![0.0; n],
        };
        ldl.refactor(&upper.values)?;
        Ok(ldl)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric refactorization with new values on the original sparsity pattern.
    pub fn refactor(&mut self, values: &[f64]) -> Result<(), LdlError> {
        assert_eq!(
            values.len(),
            self.map.len(),
            "value count does not match pattern"
        );
        for (k, &v) in values.iter().enumerate() {
            self.cx[self.map[k]] = v;
        }
        self.factor()
    }

    /// Overwrites a single original entry without refactoring.
    pub fn set_value(&mut self, original_index: usize, value: f64) {
        self.cx[self.map[original_index]] = value;
    }

    pub fn factor(&mut self) -> Result<(), LdlError> {
        let n = self.n;
        let mut y_vals = vec![0.0f64; n];
        let mut y_mark = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();

        for k in 0..n {
            self.d[k] = 0.0;
            let mut nnz_y = 0usize;
            for p in self.cp[k]..self.cp[k + 1] {
                let b = self.ci[p];
                if b == k {
                    self.d[k] += self.cx[p];
                    continue;
                }
                y_vals[b] = self.cx[p];
                if y_mark[b] {
                    continue;
                }
                y_mark[b] = true;
                elim[0] = b;
                let mut n_elim = 1usize;
                let mut next = self.etree[b];
                while next != NONE && next < k {
                    if y_mark[next] {
                        break;
                    }
                    y_mark[next] = true;
                    elim[n_elim] = next;
                    n_elim += 1;
                    next = self.etree[next];
                }
                while n_elim > 0 {
                    n_elim -= 1;
                    y_idx[nnz_y] = elim[n_elim];
                    nnz_y += 1;
                }
            }
            for idx in (0..nnz_y).rev() {
                let c = y_idx[idx];
                let space = next_space[c];
                let yc = y_vals[c];
                for q in self.lp[c]..space {
                    y_vals[self.li[q]] -= self.lx[q] * yc;
                }
                self.li[space] = k;
                let l = yc * self.dinv[c];
                self.lx[space] = l;
                self.d[k] -= yc * l;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_mark[c] = false;
            }
            if self.d[k] == 0.0 || !self.d[k].is_finite() {
                return Err(LdlError::ZeroPivot(self.perm[k]));
            }
            self.dinv[k] = 1.0 / self.d[k];
        }
        Ok(())
    }

    /// Solves `K x = b` in place.
    pub fn solve(&mut self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let x = &mut self.work;
        for k in 0..n {
            x[k] = b[self.perm[k]];
        }
        for i in 0..n {
            let xi = x[i];
            for p in self.lp[i]..self.lp[i + 1] {
                x[self.li[p]] -= self.lx[p] * xi;
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for p in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[i] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = x[k];
        }
    }

    /// Number of negative pivots (the inertia's negative count).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csc::TripletMatrix;

    fn dense_mul(full: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        full.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn solves_quasi_definite_system() {
        // [P+σI  Aᵀ; A  -1/ρ] with P = [[4,1],[1,2]], A = [[1,1],[1,0]]
        let full = vec![
            vec![4.0, 1.0, 1.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
            vec![1.0, 1.0, -0.5, 0.0],
            vec![1.0, 0.0, 0.0, -0.5],
        ];
        let upper = CscMatrix::from_dense(&full).upper_triangle();
        let mut ldl = SparseLdl::new(&upper).unwrap();
        assert_eq!(ldl.negative_pivots(), 2);
        let b = vec![1.0, -2.0, 0.5, 3.0];
        let mut x = b.clone();
        ldl.solve(&mut x);
        let back = dense_mul(&full, &x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn refactor_reuses_pattern() {
        let mut t = TripletMatrix::new(3, 3);
        t.push(0, 0, 2.0);
        t.push(1, 1, 3.0);
        t.push(2, 2, -1.0);
        t.push(0, 2, 1.0);
        let upper = t.to_csc();
        let mut ldl = SparseLdl::new(&upper).unwrap();
        let mut vals = upper.values.clone();
        vals.iter_mut().for_each(|v| *v *= 2.0);
        ldl.refactor(&vals).unwrap();
        let mut x = vec![2.0, 6.0, 0.0];
        ldl.solve(&mut x);
        // 4 x0 + 2 x2 = 2, 6 x1 = 6, 2 x0 - 2 x2 = 0
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] - x[2]).abs() < 1e-14);
        assert!((4.0 * x[0] + 2.0 * x[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_lower_entries() {
        let m = CscMatrix::from_dense(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(SparseLdl::new(&m).unwrap_err(), LdlError::NotUpper(1, 0));
    }

    #[test]
    fn zero_pivot_reported() {
        let m = CscMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(SparseLdl::new(&m), Err(LdlError::ZeroPivot(_))));
    }
}
