//! Dense lower-triangular Cholesky factor that can grow one row at a time.
//!
//! Storage is row-major packed: row `i` holds `i + 1` entries. Extending an
//! `n × n` factor by one row costs a single forward substitution, `O(n²)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// First diagonal jitter tried after a breakdown, relative to `trace / n`.
pub const JITTER_START: f64 = 1e-10;
/// Largest relative jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-4;
/// Escalation factor between consecutive jitter attempts.
pub const JITTER_GROWTH: f64 = 10.0;

/// Lower-triangular `L` with `L·Lᵀ = A` for a symmetric positive definite `A`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CholeskyFactor {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl CholeskyFactor {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row `i` of `L`, columns `0..=i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[row_start(i) + j]
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Strict factorization. Fails on the first non-positive pivot.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Input(format!(
                "cholesky needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let mut l = Self {
            n: 0,
            data: Vec::with_capacity(row_start(n)),
        };
        let mut cross = Vec::with_capacity(n);
        for i in 0..n {
            cross.clear();
            cross.extend((0..i).map(|j| a[(i, j)]));
            l.push(&cross, a[(i, i)])?;
        }
        Ok(l)
    }

    /// Factorization with the escalating diagonal-jitter retry policy.
    ///
    /// Tries `A` as is, then `A + j·(trace/n)·I` for `j = 1e-10, 1e-9, …, 1e-4`.
    /// Returns the factor and the absolute jitter that was added.
    pub fn factor_with_jitter(a: &DMatrix<f64>) -> Result<(Self, f64)> {
        let first = match Self::factor(a) {
            Ok(l) => return Ok((l, 0.0)),
            Err(e @ Error::CholeskyBreakdown { .. }) => e,
            Err(e) => return Err(e),
        };
        let n = a.nrows();
        let mean_diag = a.trace() / n as f64;
        let scale = if mean_diag > 0.0 && mean_diag.is_finite() {
            mean_diag
        } else {
            1.0
        };
        let mut last = first;
        let mut rel = JITTER_START;
        while rel <= JITTER_MAX * (1.0 + 1e-9) {
            let jitter = rel * scale;
            let mut shifted = a.clone();
            for i in 0..n {
                shifted[(i, i)] += jitter;
            }
            match Self::factor(&shifted) {
                Ok(l) => return Ok((l, jitter)),
                Err(e @ Error::CholeskyBreakdown { .. }) => last = e,
                Err(e) => return Err(e),
            }
            rel *= JITTER_GROWTH;
        }
        Err(last)
    }

    /// Appends the row for a new variable with covariances `cross` against the
    /// existing ones and variance `diag`.
    pub fn push(&mut self, cross: &[f64], diag: f64) -> Result<()> {
        if cross.len() != self.n {
            return Err(Error::Input(format!(
                "cross-covariance has length {}, factor has dimension {}",
                cross.len(),
                self.n
            )));
        }
        let l = self.solve_lower(cross);
        let pivot = diag - dot(&l, &l);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::CholeskyBreakdown {
                pivot: self.n,
                value: pivot,
            });
        }
        self.data.extend_from_slice(&l);
        self.data.push(pivot.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Non-mutating version of [`push`](Self::push).
    pub fn extend(&self, cross: &[f64], diag: f64) -> Result<Self> {
        let mut out = self.clone();
        out.push(cross, diag)?;
        Ok(out)
    }

    /// Solves `L·x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut x = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let s = dot(&row[..i], &x);
            x.push((b[i] - s) / row[i]);
        }
        x
    }

    /// Solves `Lᵀ·x = b` by back substitution.
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            let row = self.row(i);
            for j in 0..i {
                x[j] -= row[j] * xi;
            }
        }
        x
    }

    /// Solves `L·Lᵀ·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `ln det(L·Lᵀ)`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
