//! Ground-truth environments and the sequential bandit loop.

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::acquisition::{max_mean, select_from_predictions, AcquisitionRule, SelectionContext};
use crate::error::{Error, Result};
use crate::gp::{sample_from_gram, PoolPosterior};
use crate::info_gain::gain_from_variance;
use crate::kernel::{check_pool, GramMatrix, Kernel, Point};
use crate::rng::{stream_rng, Stream};

/// `f(x) = Σ_i α_i·k(x, c_i)` with centers taken from the pool.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsSpec {
    pub centers: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Upper bound `B` the RKHS norm must respect.
    pub bound: f64,
}

impl RkhsSpec {
    pub fn new(centers: Vec<usize>, coefficients: Vec<f64>, bound: f64) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::Config(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coefficients.len()
            )));
        }
        if centers.is_empty() {
            return Err(Error::Config("rkhs function needs at least one center".into()));
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("rkhs coefficients must be finite".into()));
        }
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::Config(format!(
                "rkhs norm bound must be nonnegative, got {bound}"
            )));
        }
        Ok(Self {
            centers,
            coefficients,
            bound,
        })
    }

    /// Draws `n_centers` distinct pool points and Gaussian coefficients, then
    /// rescales the coefficients so that the RKHS norm equals `bound`.
    pub fn random(
        kernel: &Kernel,
        pool: &[Point],
        n_centers: usize,
        bound: f64,
        seed: u64,
    ) -> Result<Self> {
        check_pool(pool)?;
        if n_centers == 0 || n_centers > pool.len() {
            return Err(Error::Config(format!(
                "need 1 ≤ centers ≤ pool size ({}), got {n_centers}",
                pool.len()
            )));
        }
        let mut rng = stream_rng(Stream::RkhsCenters, seed, 0);
        let centers = sample(&mut rng, pool.len(), n_centers).into_vec();
        let raw: Vec<f64> = (0..n_centers)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let spec = Self::new(centers, raw, bound)?;
        let norm = spec.norm(kernel, pool)?;
        let scale = if norm > 0.0 { bound / norm } else { 0.0 };
        let coefficients = spec.coefficients.iter().map(|a| a * scale).collect();
        Self::new(spec.centers, coefficients, bound)
    }

    /// `√(αᵀ·K_cc·α)`.
    pub fn norm(&self, kernel: &Kernel, pool: &[Point]) -> Result<f64> {
        if let Some(&c) = self.centers.iter().find(|&&c| c >= pool.len()) {
            return Err(Error::Config(format!(
                "rkhs center {c} out of range (pool size {})",
                pool.len()
            )));
        }
        let mut q = 0.0;
        for (a, &ca) in self.coefficients.iter().zip(&self.centers) {
            for (b, &cb) in self.coefficients.iter().zip(&self.centers) {
                q += a * b * kernel.eval(&pool[ca], &pool[cb])?;
            }
        }
        Ok(q.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentKind {
    SampledGp { seed: u64 },
    Rkhs { spec: RkhsSpec, norm: f64 },
    Tabular,
}

/// A finite arm set with known true values and a Gaussian observation-noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub kind: EnvironmentKind,
    pub pool: Vec<Point>,
    pub truth: Vec<f64>,
    pub noise_variance: f64,
    pub optimum_value: f64,
    /// Lowest index attaining the optimum.
    pub optimum_index: usize,
}

impl Environment {
    fn from_truth(
        kind: EnvironmentKind,
        pool: Vec<Point>,
        truth: Vec<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::Config(format!(
                "observation noise variance must be nonnegative, got {noise_variance}"
            )));
        }
        if let Some(i) = truth.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("true value at arm {i} is not finite")));
        }
        let (optimum_index, optimum_value) = truth.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, v)| if v > best.1 { (i, v) } else { best },
        );
        Ok(Self {
            kind,
            pool,
            truth,
            noise_variance,
            optimum_value,
            optimum_index,
        })
    }

    /// Truth drawn from the GP prior over the pool.
    pub fn sampled_gp(
        kernel: &Kernel,
        pool: Vec<Point>,
        noise_variance: f64,
        seed: u64,
    ) -> Result<Self> {
        let gram = GramMatrix::new(kernel, &pool)?;
        let truth = sample_from_gram(&gram, seed)?;
        Self::from_truth(EnvironmentKind::SampledGp { seed }, pool, truth, noise_variance)
    }

    /// Truth given by a kernel expansion of bounded RKHS norm.
    pub fn rkhs(
        kernel: &Kernel,
        pool: Vec<Point>,
        spec: RkhsSpec,
        noise_variance: f64,
    ) -> Result<Self> {
        check_pool(&pool)?;
        let norm = spec.norm(kernel, &pool)?;
        if norm > spec.bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "rkhs norm {norm} exceeds the bound {}",
                spec.bound
            )));
        }
        let truth = pool
            .iter()
            .map(|x| {
                spec.centers
                    .iter()
                    .zip(&spec.coefficients)
                    .map(|(&c, a)| a * kernel.eval_unchecked(x, &pool[c]))
                    .sum()
            })
            .collect();
        Self::from_truth(EnvironmentKind::Rkhs { spec, norm }, pool, truth, noise_variance)
    }

    /// Truth read from a dataset. Duplicate points are kept as separate arms.
    pub fn tabular(rows: Vec<(Point, f64)>, noise_variance: f64) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Ingestion {
                row: 0,
                message: "table has no data rows".into(),
            });
        };
        let d = first.0.dim();
        for (i, (x, v)) in rows.iter().enumerate() {
            if x.dim() != d {
                return Err(Error::Ingestion {
                    row: i + 1,
                    message: format!("point has dimension {}, expected {d}", x.dim()),
                });
            }
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row: i + 1,
                    message: format!("value {v} is not finite"),
                });
            }
        }
        let (pool, truth) = rows.into_iter().unzip();
        Self::from_truth(EnvironmentKind::Tabular, pool, truth, noise_variance)
    }

    pub fn size(&self) -> usize {
        self.pool.len()
    }

    pub fn dimension(&self) -> usize {
        self.pool[0].dim()
    }
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub index: usize,
    pub y_obs: f64,
    pub f_true: f64,
    pub regret: f64,
    pub regret_cum: f64,
    pub regret_avg: f64,
    /// `β_t`, for rules that use a schedule.
    pub beta: Option<f64>,
    pub info_gain_step: f64,
    pub info_gain_cum: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub rounds: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `R_T` of the last recorded round.
    pub fn cumulative_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.regret_cum)
    }

    /// `R_t / t` at round `t` (1-based).
    pub fn average_regret_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1)
            .and_then(|i| self.rounds.get(i))
            .map(|r| r.regret_avg)
    }

    pub fn info_gain(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.info_gain_cum)
    }
}

/// A run that stopped early. `partial` holds the completed rounds.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("run failed at round {round}: {source}")]
pub struct RunError {
    pub round: u64,
    pub source: Error,
    pub partial: RunTrace,
}

fn observation_noise(seed: u64, t: u64, variance: f64) -> f64 {
    if variance == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(&mut stream_rng(Stream::ObservationNoise, seed, t));
    variance.sqrt() * z
}

/// Plays `horizon` rounds of `rule` against `env`.
///
/// The model posterior uses `kernel` and `model_noise`, which may differ from
/// the environment's own noise level. Round `t` is chosen from the posterior of
/// rounds `< t`; its observation noise is drawn from a stream keyed by
/// `(seed, t)`.
pub fn run(
    env: &Environment,
    rule: &AcquisitionRule,
    kernel: &Kernel,
    model_noise: f64,
    horizon: u64,
    seed: u64,
) -> std::result::Result<RunTrace, RunError> {
    let fail = |round: u64, source: Error, partial: RunTrace| RunError {
        round,
        source,
        partial,
    };
    if horizon == 0 {
        return Err(fail(0, Error::Config("horizon must be at least 1".into()), RunTrace::default()));
    }
    let setup = rule
        .validate()
        .and_then(|_| GramMatrix::new(kernel, &env.pool));
    let gram = setup.map_err(|e| fail(0, e, RunTrace::default()))?;
    let mut post =
        PoolPosterior::new(&gram, model_noise).map_err(|e| fail(0, e, RunTrace::default()))?;

    let mut trace = RunTrace {
        rounds: Vec::with_capacity(horizon as usize),
    };
    let mut regret_cum = 0.0;
    let mut gain_cum = 0.0;
    let mut best_y = f64::NEG_INFINITY;
    for t in 1..=horizon {
        let step = (|| -> Result<RoundRecord> {
            let predictions = post.predictions()?;
            let incumbent = if post.chosen().is_empty() {
                max_mean(&predictions)
            } else {
                best_y
            };
            let ctx = SelectionContext {
                t,
                incumbent,
                info_gain: gain_cum,
            };
            let sel = select_from_predictions(rule, &predictions, &ctx)?;
            let gain = gain_from_variance(predictions[sel.index].variance, model_noise)?;
            let f_true = env.truth[sel.index];
            let y_obs = f_true + observation_noise(seed, t, env.noise_variance);
            post.observe(sel.index, y_obs)?;
            let regret = env.optimum_value - f_true;
            Ok(RoundRecord {
                t,
                index: sel.index,
                y_obs,
                f_true,
                regret,
                regret_cum: regret_cum + regret,
                regret_avg: (regret_cum + regret) / t as f64,
                beta: sel.beta,
                info_gain_step: gain,
                info_gain_cum: gain_cum + gain,
            })
        })();
        match step {
            Ok(rec) => {
                regret_cum = rec.regret_cum;
                gain_cum = rec.info_gain_cum;
                best_y = best_y.max(rec.y_obs);
                trace.rounds.push(rec);
            }
            Err(e) => return Err(fail(t, e, trace)),
        }
    }
    Ok(trace)
}
