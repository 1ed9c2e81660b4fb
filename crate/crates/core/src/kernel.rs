//! Covariance functions, Gram matrices and their empirical eigenspectra.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A location in the decision domain. Coordinates are finite reals,
/// conventionally normalized to `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("point must have at least one coordinate".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Input(format!("coordinate {i} is not finite")));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Matérn smoothness; only the half-integer values with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl MaternNu {
    pub fn value(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::ThreeHalves => 1.5,
            MaternNu::FiveHalves => 2.5,
        }
    }

    pub fn from_value(nu: f64) -> Result<Self> {
        match nu {
            0.5 => Ok(MaternNu::Half),
            1.5 => Ok(MaternNu::ThreeHalves),
            2.5 => Ok(MaternNu::FiveHalves),
            _ => Err(Error::Config(format!(
                "matern smoothness must be one of 0.5, 1.5, 2.5; got {nu}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Linear,
    SquaredExponential,
    Matern(MaternNu),
}

/// Covariance function with its hyperparameters.
///
/// The lengthscale is ignored by the linear kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    lengthscale: f64,
    signal_variance: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, lengthscale: f64, signal_variance: f64) -> Result<Self> {
        if !(signal_variance > 0.0) || !signal_variance.is_finite() {
            return Err(Error::Config(format!(
                "signal variance must be positive and finite, got {signal_variance}"
            )));
        }
        if family != KernelFamily::Linear && (!(lengthscale > 0.0) || !lengthscale.is_finite()) {
            return Err(Error::Config(format!(
                "lengthscale must be positive and finite, got {lengthscale}"
            )));
        }
        Ok(Self {
            family,
            lengthscale,
            signal_variance,
        })
    }

    pub fn linear(signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::Linear, 1.0, signal_variance)
    }

    pub fn squared_exponential(lengthscale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, lengthscale, signal_variance)
    }

    pub fn matern(nu: MaternNu, lengthscale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern(nu), lengthscale, signal_variance)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn is_stationary(&self) -> bool {
        self.family != KernelFamily::Linear
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(Error::Input(format!(
                "dimension mismatch: {} vs {}",
                x.dim(),
                y.dim()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let s2 = self.signal_variance;
        if self.family == KernelFamily::Linear {
            return s2 * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        }
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let l = self.lengthscale;
        match self.family {
            KernelFamily::SquaredExponential => s2 * (-sq / (2.0 * l * l)).exp(),
            KernelFamily::Matern(nu) => {
                let r = sq.sqrt() / l;
                match nu {
                    MaternNu::Half => s2 * (-r).exp(),
                    MaternNu::ThreeHalves => {
                        let a = 3f64.sqrt() * r;
                        s2 * (1.0 + a) * (-a).exp()
                    }
                    MaternNu::FiveHalves => {
                        let a = 5f64.sqrt() * r;
                        s2 * (1.0 + a + 5.0 * r * r / 3.0) * (-a).exp()
                    }
                }
            }
            KernelFamily::Linear => unreachable!(),
        }
    }

    /// `k(x, x)`; equals the signal variance for stationary families.
    pub fn prior_variance(&self, x: &Point) -> f64 {
        self.eval_unchecked(x, x)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Linear => write!(f, "linear(s2={})", self.signal_variance),
            KernelFamily::SquaredExponential => write!(
                f,
                "se(l={},s2={})",
                self.lengthscale, self.signal_variance
            ),
            KernelFamily::Matern(nu) => write!(
                f,
                "matern{}(l={},s2={})",
                nu.value(),
                self.lengthscale,
                self.signal_variance
            ),
        }
    }
}

pub(crate) fn check_pool(pool: &[Point]) -> Result<usize> {
    let first = pool
        .first()
        .ok_or_else(|| Error::Input("pool is empty".into()))?;
    let d = first.dim();
    if let Some(i) = pool.iter().position(|p| p.dim() != d) {
        return Err(Error::Input(format!(
            "pool point {i} has dimension {}, expected {d}",
            pool[i].dim()
        )));
    }
    Ok(d)
}

/// Kernel matrix over an ordered point set.
///
/// The raw entries are kept as computed (no clamping or jitter); downstream
/// consumers decide how to treat rank deficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    pool: Vec<Point>,
}

impl GramMatrix {
    /// Builds `K[i][j] = k(pool[i], pool[j])`.
    pub fn new(kernel: &Kernel, pool: &[Point]) -> Result<Self> {
        check_pool(pool)?;
        let n = pool.len();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = kernel.eval_unchecked(&pool[i], &pool[j]);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Ok(Self {
            entries,
            pool: pool.to_vec(),
        })
    }

    /// Wraps a precomputed symmetric matrix. The resulting Gram has no pool.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || n != entries.ncols() {
            return Err(Error::Input(format!(
                "gram matrix must be square and nonempty, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Input(format!(
                        "gram matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            pool: Vec::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Points the matrix was built from; empty for [`from_entries`](Self::from_entries).
    pub fn pool(&self) -> &[Point] {
        &self.pool
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let k = indices.len();
        DMatrix::from_fn(k, k, |a, b| self.entries[(indices[a], indices[b])])
    }

    /// Eigenvalues of the symmetrized matrix, descending, round-off negatives clamped to zero.
    pub fn spectrum(&self) -> Result<Spectrum> {
        if self.entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("gram matrix has non-finite entries".into()));
        }
        let sym = (&self.entries + self.entries.transpose()) * 0.5;
        let trace = sym.trace();
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let lambda_max = eigenvalues[0];
        let effective_rank = if lambda_max > 0.0 {
            eigenvalues
                .iter()
                .filter(|&&v| v >= 1e-10 * lambda_max)
                .count()
        } else {
            0
        };
        Ok(Spectrum {
            eigenvalues,
            trace,
            effective_rank,
        })
    }
}

/// Eigenvalue spectrum of a Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    /// Number of eigenvalues at least `1e-10 · λ_max`.
    pub effective_rank: usize,
}

impl Spectrum {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Least-squares slope of `ln λ_i` against `ln i` over the numerically
    /// nonzero head of the spectrum. Polynomially decaying spectra (Matérn)
    /// give a roughly constant slope; exponential decay (SE) keeps steepening.
    /// `None` when fewer than three eigenvalues are usable.
    pub fn decay_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.eigenvalues[..self.effective_rank]
            .iter()
            .enumerate()
            .map(|(i, &v)| (((i + 1) as f64).ln(), v.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(-sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn closed_forms() {
        let se = Kernel::squared_exponential(1.0, 1.0).unwrap();
        assert_eq!(se.eval(&p(&[0.3, 0.1]), &p(&[0.3, 0.1])).unwrap(), 1.0);
        let v = se.eval(&p(&[0.0]), &p(&[1.0])).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.606531).abs() < 1e-6);

        let lin = Kernel::linear(1.0).unwrap();
        assert_eq!(lin.eval(&p(&[1.0, 2.0]), &p(&[3.0, 4.0])).unwrap(), 11.0);

        let m12 = Kernel::matern(MaternNu::Half, 1.0, 1.0).unwrap();
        let v = m12.eval(&p(&[0.0, 0.0]), &p(&[0.6, 0.8])).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn matern_higher_orders_at_unit_distance() {
        let x = p(&[0.0]);
        let y = p(&[2.0]);
        let m32 = Kernel::matern(MaternNu::ThreeHalves, 2.0, 3.0).unwrap();
        let a = 3f64.sqrt();
        assert!((m32.eval(&x, &y).unwrap() - 3.0 * (1.0 + a) * (-a).exp()).abs() < 1e-14);
        let m52 = Kernel::matern(MaternNu::FiveHalves, 2.0, 3.0).unwrap();
        let b = 5f64.sqrt();
        let want = 3.0 * (1.0 + b + 5.0 / 3.0) * (-b).exp();
        assert!((m52.eval(&x, &y).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let se = Kernel::squared_exponential(1.0, 1.0).unwrap();
        assert!(matches!(
            se.eval(&p(&[0.0]), &p(&[0.0, 1.0])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            GramMatrix::new(&se, &[p(&[0.0]), p(&[0.0, 1.0])]),
            Err(Error::Input(_))
        ));
        assert!(matches!(GramMatrix::new(&se, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn invalid_hyperparameters() {
        assert!(Kernel::squared_exponential(0.0, 1.0).is_err());
        assert!(Kernel::squared_exponential(1.0, -1.0).is_err());
        assert!(Kernel::matern(MaternNu::Half, f64::NAN, 1.0).is_err());
        assert!(MaternNu::from_value(1.0).is_err());
        assert_eq!(MaternNu::from_value(2.5).unwrap(), MaternNu::FiveHalves);
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let se = Kernel::squared_exponential(1.0, 2.5).unwrap();
        let g = GramMatrix::new(&se, &[p(&[0.4])]).unwrap();
        assert_eq!(g.entries(), &DMatrix::from_element(1, 1, 2.5));

        let se1 = Kernel::squared_exponential(1.0, 1.0).unwrap();
        let g = GramMatrix::new(&se1, &[p(&[0.4]), p(&[0.4])]).unwrap();
        assert_eq!(g.entries(), &DMatrix::from_element(2, 2, 1.0));
        let s = g.spectrum().unwrap();
        assert_eq!(s.effective_rank, 1);
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!(s.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let g = GramMatrix::from_entries(DMatrix::identity(3, 3)).unwrap();
        let s = g.spectrum().unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for v in &s.eigenvalues {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.trace, 3.0);
        assert_eq!(s.effective_rank, 3);
    }

    #[test]
    fn spectrum_rejects_non_finite() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 0)] = f64::NAN;
        let g = GramMatrix::from_entries(m).unwrap();
        assert!(matches!(g.spectrum(), Err(Error::Input(_))));
    }

    #[test]
    fn from_entries_requires_symmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GramMatrix::from_entries(m).is_err());
    }

    #[test]
    fn matern_spectrum_decays_slower_than_se() {
        let pool: Vec<Point> = (0..40).map(|i| p(&[i as f64 / 39.0])).collect();
        let se = GramMatrix::new(&Kernel::squared_exponential(0.2, 1.0).unwrap(), &pool)
            .unwrap()
            .spectrum()
            .unwrap();
        let m12 = GramMatrix::new(&Kernel::matern(MaternNu::Half, 0.2, 1.0).unwrap(), &pool)
            .unwrap()
            .spectrum()
            .unwrap();
        assert!(m12.effective_rank > se.effective_rank);
        assert!(m12.decay_exponent().unwrap() < se.decay_exponent().unwrap());
    }
}
