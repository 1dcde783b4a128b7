//! Compressed sparse column storage and a triplet builder.

/// Sparse matrix in compressed sparse column form.
///
/// Row indices within a column are sorted and unique for matrices produced by
/// [`TripletMatrix::to_csc`].
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from dense row-major data, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = TripletMatrix::new(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csc()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (start, end) = (self.col_ptr[j], self.col_ptr[j + 1]);
        self.row_idx[start..end]
            .iter()
            .position(|&r| r == i)
            .map_or(0.0, |p| self.values[start + p])
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1])
                .map(move |p| (self.row_idx[p], j, self.values[p]))
        })
    }

    /// `y = self * x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    /// `y = selfᵀ * x`
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            let mut acc = 0.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.values[p] * x[self.row_idx[p]];
            }
            y[j] = acc;
        }
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let r = self.row_idx[p];
                let dst = next[r];
                row_idx[dst] = j;
                values[dst] = self.values[p];
                next[r] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Keeps entries with `row <= col`.
    pub fn upper_triangle(&self) -> CscMatrix {
        let mut t = TripletMatrix::new(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            if i <= j {
                t.push(i, j, v);
            }
        }
        t.to_csc()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let mut worst = 0.0f64;
        for (i, j, v) in self.iter() {
            worst = worst.max((v - t.get(i, j)).abs());
        }
        for (i, j, v) in t.iter() {
            worst = worst.max((v - self.get(i, j)).abs());
        }
        worst
    }

    /// Infinity norm of each column.
    pub fn col_inf_norms(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| {
                self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect()
    }

    /// Infinity norm of each row.
    pub fn row_inf_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.nrows];
        for (i, _, v) in self.iter() {
            out[i] = out[i].max(v.abs());
        }
        out
    }

    /// `self <- diag(left) * self * diag(right)`
    pub fn scale(&mut self, left: &[f64], right: &[f64]) {
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                self.values[p] *= left[self.row_idx[p]] * right[j];
            }
        }
    }
}

/// Coordinate-format accumulator; duplicate entries are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.nrows && col < self.ncols,
            "triplet ({row}, {col}) out of bounds"
        );
        self.entries.push((row, col, value));
    }

    /// Adds `value` at `(i, j)` and `(j, i)`; a diagonal entry is added once.
    pub fn push_sym(&mut self, i: usize, j: usize, value: f64) {
        self.push(i, j, value);
        if i != j {
            self.push(j, i, value);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csc(&self) -> CscMatrix {
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|e| (e.1, e.0));
        let mut col_ptr = vec![0usize; self.ncols + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            last = Some((r, c));
        }
        for j in 0..self.ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr,
            row_idx,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletMatrix::new(2, 2);
        t.push(0, 1, 1.0);
        t.push(0, 1, 2.5);
        t.push(1, 0, -1.0);
        let m = t.to_csc();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn products_match_dense() {
        let m = CscMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 4.0]]);
        let mut y = vec![0.0; 2];
        m.mul_vec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![7.0, 6.0]);
        let mut z = vec![0.0; 3];
        m.tr_mul_vec(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![1.0, -3.0, 6.0]);
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn asymmetry_detects_mismatch() {
        let mut t = TripletMatrix::new(2, 2);
        t.push_sym(0, 1, 2.0);
        t.push(0, 0, 1.0);
        assert_eq!(t.to_csc().asymmetry(), 0.0);
        t.push(1, 0, 0.5);
        assert_eq!(t.to_csc().asymmetry(), 0.5);
    }
}
