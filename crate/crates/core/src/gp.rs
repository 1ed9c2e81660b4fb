//! Exact GP regression: immutable posteriors grown one observation at a time,
//! a pool-restricted incremental posterior for bandit loops, and prior sampling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernel::{check_pool, GramMatrix, Kernel, Point};
use crate::linalg::{dot, CholeskyFactor};
use crate::rng::{stream_rng, Stream};

/// Round-off below zero tolerated (and clamped) in posterior variances.
pub const VARIANCE_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Point,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Point, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::Input(format!("observation value {y} is not finite")));
        }
        Ok(Self { x, y })
    }
}

/// Posterior mean and variance at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub(crate) fn clamp_variance(variance: f64) -> Result<f64> {
    if variance >= 0.0 {
        Ok(variance)
    } else if variance >= -VARIANCE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "posterior variance {variance:e} is below the round-off tolerance"
        )))
    }
}

/// GP posterior after `t` noisy observations.
///
/// Holds the Cholesky factor `L` of `K_t + (σ² + jitter)·I`, the whitened
/// targets `L⁻¹y` and `α = (K_t + σ²I)⁻¹y`. Never mutated after construction;
/// [`update`](Self::update) returns a new snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior {
    kernel: Kernel,
    noise_variance: f64,
    jitter: f64,
    observations: Vec<Observation>,
    factor: CholeskyFactor,
    whitened: Vec<f64>,
    alpha: Vec<f64>,
}

impl GpPosterior {
    pub fn empty(kernel: Kernel, noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Config(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        Ok(Self {
            kernel,
            noise_variance,
            jitter: 0.0,
            observations: Vec::new(),
            factor: CholeskyFactor::empty(),
            whitened: Vec::new(),
            alpha: Vec::new(),
        })
    }

    /// From-scratch fit on a batch of observations (strict; no jitter).
    pub fn fit(kernel: Kernel, noise_variance: f64, observations: &[Observation]) -> Result<Self> {
        let empty = Self::empty(kernel, noise_variance)?;
        empty.refit(observations.to_vec(), false)
    }

    /// From-scratch fit applying the escalating diagonal-jitter policy on breakdown.
    pub fn fit_with_jitter(
        kernel: Kernel,
        noise_variance: f64,
        observations: &[Observation],
    ) -> Result<Self> {
        let empty = Self::empty(kernel, noise_variance)?;
        empty.refit(observations.to_vec(), true)
    }

    fn refit(&self, observations: Vec<Observation>, jitter: bool) -> Result<Self> {
        if observations.is_empty() {
            return Self::empty(self.kernel, self.noise_variance);
        }
        let xs: Vec<Point> = observations.iter().map(|o| o.x.clone()).collect();
        check_pool(&xs)?;
        let n = xs.len();
        let mut k = GramMatrix::new(&self.kernel, &xs)?.entries().clone();
        for i in 0..n {
            k[(i, i)] += self.noise_variance;
        }
        let (factor, added) = if jitter {
            CholeskyFactor::factor_with_jitter(&k)?
        } else {
            (CholeskyFactor::factor(&k)?, 0.0)
        };
        let ys: Vec<f64> = observations.iter().map(|o| o.y).collect();
        let whitened = factor.solve_lower(&ys);
        let alpha = factor.solve_upper(&whitened);
        Ok(Self {
            kernel: self.kernel,
            noise_variance: self.noise_variance,
            jitter: added,
            observations,
            factor,
            whitened,
            alpha,
        })
    }

    /// Adds one observation by extending the Cholesky factor by one row.
    ///
    /// A non-positive pivot is reported as [`Error::CholeskyBreakdown`]; use
    /// [`update_with_jitter`](Self::update_with_jitter) to apply the jitter policy.
    pub fn update(&self, obs: Observation) -> Result<Self> {
        if let Some(first) = self.observations.first() {
            if first.x.dim() != obs.x.dim() {
                return Err(Error::Input(format!(
                    "observation has dimension {}, posterior has {}",
                    obs.x.dim(),
                    first.x.dim()
                )));
            }
        }
        let cross: Vec<f64> = self
            .observations
            .iter()
            .map(|o| self.kernel.eval_unchecked(&o.x, &obs.x))
            .collect();
        let diag = self.kernel.prior_variance(&obs.x) + self.noise_variance + self.jitter;
        let factor = self.factor.extend(&cross, diag)?;
        let t = self.observations.len();
        let row = factor.row(t);
        let w = (obs.y - dot(&row[..t], &self.whitened)) / row[t];
        let mut whitened = self.whitened.clone();
        whitened.push(w);
        let alpha = factor.solve_upper(&whitened);
        let mut observations = self.observations.clone();
        observations.push(obs);
        Ok(Self {
            kernel: self.kernel,
            noise_variance: self.noise_variance,
            jitter: self.jitter,
            observations,
            factor,
            whitened,
            alpha,
        })
    }

    /// [`update`](Self::update), falling back to a jittered from-scratch fit on breakdown.
    pub fn update_with_jitter(&self, obs: Observation) -> Result<Self> {
        match self.update(obs.clone()) {
            Err(Error::CholeskyBreakdown { .. }) => {
                let mut all = self.observations.clone();
                all.push(obs);
                self.refit(all, true)
            }
            other => other,
        }
    }

    pub fn predict(&self, x: &Point) -> Result<Prediction> {
        let prior = self.kernel.prior_variance(x);
        let Some(first) = self.observations.first() else {
            return Ok(Prediction {
                mean: 0.0,
                variance: prior,
            });
        };
        if first.x.dim() != x.dim() {
            return Err(Error::Input(format!(
                "query has dimension {}, posterior has {}",
                x.dim(),
                first.x.dim()
            )));
        }
        let k: Vec<f64> = self
            .observations
            .iter()
            .map(|o| self.kernel.eval_unchecked(&o.x, x))
            .collect();
        let v = self.factor.solve_lower(&k);
        Ok(Prediction {
            mean: dot(&k, &self.alpha),
            variance: clamp_variance(prior - dot(&v, &v))?,
        })
    }

    /// `½ ln det(I + σ⁻²K_t)` of the observed inputs, read off the factor.
    pub fn information_gain(&self) -> f64 {
        let t = self.observations.len() as f64;
        0.5 * (self.factor.log_det() - t * self.noise_variance.ln())
    }

    /// Largest observed value, if any.
    pub fn best_observed(&self) -> Option<f64> {
        self.observations.iter().map(|o| o.y).reduce(f64::max)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Diagonal jitter in effect (zero unless the jitter policy kicked in).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// Posterior restricted to the points of a precomputed Gram matrix.
///
/// Keeps the rows of `L⁻¹·K_{A,pool}` so that conditioning on one more pool
/// point costs `O(t·n)` and mean/variance at every pool point stay current.
/// Used by the bandit loop and by greedy experimental design.
#[derive(Debug, Clone)]
pub struct PoolPosterior<'g> {
    gram: &'g GramMatrix,
    noise_variance: f64,
    jitter: f64,
    chosen: Vec<usize>,
    values: Vec<f64>,
    factor: CholeskyFactor,
    whitened: Vec<f64>,
    projected: Vec<Vec<f64>>,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl<'g> PoolPosterior<'g> {
    pub fn new(gram: &'g GramMatrix, noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Config(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        let n = gram.size();
        Ok(Self {
            gram,
            noise_variance,
            jitter: 0.0,
            chosen: Vec::new(),
            values: Vec::new(),
            factor: CholeskyFactor::empty(),
            whitened: Vec::new(),
            projected: Vec::new(),
            mean: vec![0.0; n],
            variance: (0..n).map(|i| gram.get(i, i)).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.gram.size()
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Raw (unclamped) posterior variance at pool index `i`.
    pub fn raw_variance(&self, i: usize) -> f64 {
        self.variance[i]
    }

    pub fn predict(&self, i: usize) -> Result<Prediction> {
        if i >= self.size() {
            return Err(Error::Input(format!(
                "pool index {i} out of range (pool size {})",
                self.size()
            )));
        }
        Ok(Prediction {
            mean: self.mean[i],
            variance: clamp_variance(self.variance[i])?,
        })
    }

    pub fn predictions(&self) -> Result<Vec<Prediction>> {
        (0..self.size()).map(|i| self.predict(i)).collect()
    }

    /// Conditions on a noisy observation `y` at pool index `index`.
    ///
    /// Falls back to a jittered rebuild if the one-row extension breaks down.
    pub fn observe(&mut self, index: usize, y: f64) -> Result<()> {
        let n = self.size();
        if index >= n {
            return Err(Error::Input(format!(
                "pool index {index} out of range (pool size {n})"
            )));
        }
        if !y.is_finite() {
            return Err(Error::Input(format!("observation value {y} is not finite")));
        }
        let cross: Vec<f64> = self.chosen.iter().map(|&c| self.gram.get(index, c)).collect();
        let diag = self.gram.get(index, index) + self.noise_variance + self.jitter;
        match self.factor.push(&cross, diag) {
            Ok(()) => {}
            Err(Error::CholeskyBreakdown { .. }) => {
                self.chosen.push(index);
                self.values.push(y);
                return self.rebuild();
            }
            Err(e) => return Err(e),
        }
        let t = self.chosen.len();
        let row = self.factor.row(t).to_vec();
        let pivot = row[t];
        let mut fresh = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = self.gram.get(index, j);
            for (r, l) in row[..t].iter().enumerate() {
                s -= l * self.projected[r][j];
            }
            fresh.push(s / pivot);
        }
        let w = (y - dot(&row[..t], &self.whitened)) / pivot;
        for j in 0..n {
            self.mean[j] += fresh[j] * w;
            self.variance[j] -= fresh[j] * fresh[j];
        }
        self.chosen.push(index);
        self.values.push(y);
        self.whitened.push(w);
        self.projected.push(fresh);
        Ok(())
    }

    fn rebuild(&mut self) -> Result<()> {
        let mut k = self.gram.submatrix(&self.chosen);
        let t = self.chosen.len();
        for i in 0..t {
            k[(i, i)] += self.noise_variance;
        }
        let (factor, jitter) = CholeskyFactor::factor_with_jitter(&k)?;
        let n = self.size();
        self.projected = vec![Vec::with_capacity(n); t];
        let mut col = vec![0.0; t];
        for j in 0..n {
            for (a, &c) in self.chosen.iter().enumerate() {
                col[a] = self.gram.get(c, j);
            }
            let v = factor.solve_lower(&col);
            for (a, va) in v.into_iter().enumerate() {
                self.projected[a].push(va);
            }
        }
        self.whitened = factor.solve_lower(&self.values);
        for j in 0..n {
            let mut m = 0.0;
            let mut v = self.gram.get(j, j);
            for a in 0..t {
                m += self.projected[a][j] * self.whitened[a];
                v -= self.projected[a][j] * self.projected[a][j];
            }
            self.mean[j] = m;
            self.variance[j] = v;
        }
        self.factor = factor;
        self.jitter = jitter;
        Ok(())
    }
}

/// Draws `f ~ N(0, K)` over `pool`, deterministically for a given seed.
///
/// Uses the symmetric square root `U·diag(√λ)`, with round-off negative
/// eigenvalues clamped to zero, so rank-deficient Grams (duplicate or
/// near-duplicate points) give exactly correlated draws.
pub fn sample_function(kernel: &Kernel, pool: &[Point], seed: u64) -> Result<Vec<f64>> {
    let gram = GramMatrix::new(kernel, pool)?;
    sample_from_gram(&gram, seed)
}

pub(crate) fn sample_from_gram(gram: &GramMatrix, seed: u64) -> Result<Vec<f64>> {
    let n = gram.size();
    let sym = (gram.entries() + gram.entries().transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    if let Some(bad) = eig.eigenvalues.iter().find(|&&v| v < -1e-8 * lambda_max.max(1e-300)) {
        return Err(Error::Numerical(format!(
            "gram matrix is not positive semidefinite (eigenvalue {bad:e})"
        )));
    }
    let mut rng = stream_rng(Stream::GpSample, seed, 0);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let scaled: Vec<f64> = eig
        .eigenvalues
        .iter()
        .zip(&z)
        .map(|(&l, &zi)| l.max(0.0).sqrt() * zi)
        .collect();
    let root = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, j)]);
    let f: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| root[(i, j)] * scaled[j]).sum())
        .collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("sampled function has non-finite values".into()));
    }
    Ok(f)
}
