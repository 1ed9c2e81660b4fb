//! Upper-confidence-bound selection and the competing criteria
//! (expected improvement, probability of improvement, pure exploration,
//! pure exploitation).

use std::f64::consts::PI;
use std::fmt;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gp::{GpPosterior, Prediction};
use crate::kernel::Point;

/// Confidence-width sequence `β_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    /// `β_t = 2·ln(|D|·t²·π² / (6δ))` for a finite domain `D`.
    FiniteBayesian { domain_size: usize, delta: f64 },
    /// `β_t = (B + R·√(2·(γ̂_{t−1} + 1 + ln(1/δ))))²` where `B` bounds the
    /// RKHS norm, `R` bounds the noise and `γ̂_{t−1}` is the information
    /// gained by the first `t − 1` observations.
    RkhsAgnostic {
        delta: f64,
        norm_bound: f64,
        noise_bound: f64,
    },
    Constant(f64),
}

impl BetaSchedule {
    pub fn finite_bayesian(domain_size: usize, delta: f64) -> Result<Self> {
        let s = BetaSchedule::FiniteBayesian { domain_size, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn rkhs_agnostic(delta: f64, norm_bound: f64, noise_bound: f64) -> Result<Self> {
        let s = BetaSchedule::RkhsAgnostic {
            delta,
            norm_bound,
            noise_bound,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(value: f64) -> Result<Self> {
        let s = BetaSchedule::Constant(value);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let check_delta = |delta: f64| {
            if delta > 0.0 && delta < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )))
            }
        };
        match *self {
            BetaSchedule::FiniteBayesian { domain_size, delta } => {
                if domain_size == 0 {
                    return Err(Error::Config("domain size must be positive".into()));
                }
                check_delta(delta)
            }
            BetaSchedule::RkhsAgnostic {
                delta,
                norm_bound,
                noise_bound,
            } => {
                check_delta(delta)?;
                nonneg("rkhs norm bound", norm_bound)?;
                nonneg("noise bound", noise_bound)
            }
            BetaSchedule::Constant(v) => nonneg("constant beta", v),
        }
    }

    /// `β_t` for round `t ≥ 1`. `info_gain` is the information gained by the
    /// observations of rounds `< t`; only the agnostic schedule reads it.
    pub fn beta(&self, t: u64, info_gain: f64) -> Result<f64> {
        if t == 0 {
            return Err(Error::Input("rounds are numbered from 1".into()));
        }
        self.validate()?;
        let t = t as f64;
        let value = match *self {
            BetaSchedule::FiniteBayesian { domain_size, delta } => {
                2.0 * (domain_size as f64 * t * t * PI * PI / (6.0 * delta)).ln()
            }
            BetaSchedule::RkhsAgnostic {
                delta,
                norm_bound,
                noise_bound,
            } => {
                let gain = info_gain.max(0.0);
                let width = (2.0 * (gain + 1.0 + (1.0 / delta).ln())).sqrt();
                (norm_bound + noise_bound * width).powi(2)
            }
            BetaSchedule::Constant(v) => v,
        };
        if !value.is_finite() {
            return Err(Error::Numerical(format!("beta_t is not finite ({value})")));
        }
        Ok(value.max(0.0))
    }

    pub fn name(&self) -> &'static str {
        match self {
            BetaSchedule::FiniteBayesian { .. } => "finite_bayesian",
            BetaSchedule::RkhsAgnostic { .. } => "rkhs_agnostic",
            BetaSchedule::Constant(_) => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcquisitionRule {
    Ucb(BetaSchedule),
    ExpectedImprovement { xi: f64 },
    ProbabilityOfImprovement { xi: f64 },
    MaxVariance,
    MaxMean,
}

impl AcquisitionRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AcquisitionRule::Ucb(s) => s.validate(),
            AcquisitionRule::ExpectedImprovement { xi }
            | AcquisitionRule::ProbabilityOfImprovement { xi } => {
                if xi >= 0.0 && xi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "incumbent margin must be nonnegative, got {xi}"
                    )))
                }
            }
            AcquisitionRule::MaxVariance | AcquisitionRule::MaxMean => Ok(()),
        }
    }

    pub fn schedule(&self) -> Option<&BetaSchedule> {
        match self {
            AcquisitionRule::Ucb(s) => Some(s),
            _ => None,
        }
    }

    pub fn needs_incumbent(&self) -> bool {
        matches!(
            self,
            AcquisitionRule::ExpectedImprovement { .. }
                | AcquisitionRule::ProbabilityOfImprovement { .. }
        )
    }
}

impl fmt::Display for AcquisitionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcquisitionRule::Ucb(s) => write!(f, "ucb-{}", s.name()),
            AcquisitionRule::ExpectedImprovement { .. } => f.write_str("ei"),
            AcquisitionRule::ProbabilityOfImprovement { .. } => f.write_str("pi"),
            AcquisitionRule::MaxVariance => f.write_str("max_variance"),
            AcquisitionRule::MaxMean => f.write_str("max_mean"),
        }
    }
}

/// Everything besides the posterior moments that a rule may read at round `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionContext {
    pub t: u64,
    /// Incumbent `y⁺` for EI/PI.
    pub incumbent: f64,
    /// Information gain of the observations before round `t`.
    pub info_gain: f64,
}

/// Result of a selection: pool index, the rule's value there and `β_t` if used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: f64,
    pub beta: Option<f64>,
}

/// `μ + √β·σ`.
pub fn ucb_value(pred: &Prediction, beta: f64) -> f64 {
    pred.mean + beta.sqrt() * pred.std_dev()
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `E[max(f − y⁺ − ξ, 0)]` under `f ~ N(μ, σ²)`.
pub fn expected_improvement(pred: &Prediction, incumbent: f64, xi: f64) -> f64 {
    let gap = pred.mean - incumbent - xi;
    let sigma = pred.std_dev();
    if sigma == 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * std_normal_cdf(z) + sigma * std_normal_pdf(z)).max(0.0)
}

/// `P(f > y⁺ + ξ)` under `f ~ N(μ, σ²)`.
pub fn probability_of_improvement(pred: &Prediction, incumbent: f64, xi: f64) -> f64 {
    let gap = pred.mean - incumbent - xi;
    let sigma = pred.std_dev();
    if sigma == 0.0 {
        return if gap > 0.0 { 1.0 } else { 0.0 };
    }
    std_normal_cdf(gap / sigma)
}

/// Scores every candidate and returns the argmax, lowest index on ties.
pub fn select_from_predictions(
    rule: &AcquisitionRule,
    predictions: &[Prediction],
    ctx: &SelectionContext,
) -> Result<Selection> {
    if predictions.is_empty() {
        return Err(Error::Input("candidate pool is empty".into()));
    }
    if ctx.t == 0 {
        return Err(Error::Input("rounds are numbered from 1".into()));
    }
    let beta = match rule {
        AcquisitionRule::Ucb(s) => Some(s.beta(ctx.t, ctx.info_gain)?),
        _ => None,
    };
    let score = |p: &Prediction| match *rule {
        AcquisitionRule::Ucb(_) => ucb_value(p, beta.unwrap_or(0.0)),
        AcquisitionRule::ExpectedImprovement { xi } => expected_improvement(p, ctx.incumbent, xi),
        AcquisitionRule::ProbabilityOfImprovement { xi } => {
            probability_of_improvement(p, ctx.incumbent, xi)
        }
        AcquisitionRule::MaxVariance => p.variance,
        AcquisitionRule::MaxMean => p.mean,
    };
    let mut best = Selection {
        index: 0,
        score: f64::NEG_INFINITY,
        beta,
    };
    for (i, p) in predictions.iter().enumerate() {
        let s = score(p);
        if !s.is_finite() {
            return Err(Error::Numerical(format!(
                "acquisition score at candidate {i} is not finite ({s})"
            )));
        }
        if s > best.score {
            best.index = i;
            best.score = s;
        }
    }
    Ok(best)
}

/// Selects a pool point for round `t` given the posterior built from rounds `< t`.
///
/// The EI/PI incumbent is the best observed value, or the best posterior
/// mean over the pool before any observation.
pub fn select(
    rule: &AcquisitionRule,
    posterior: &GpPosterior,
    pool: &[Point],
    t: u64,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::Input("candidate pool is empty".into()));
    }
    let predictions = pool
        .iter()
        .map(|x| posterior.predict(x))
        .collect::<Result<Vec<_>>>()?;
    let incumbent = posterior
        .best_observed()
        .unwrap_or_else(|| max_mean(&predictions));
    let ctx = SelectionContext {
        t,
        incumbent,
        info_gain: posterior.information_gain(),
    };
    select_from_predictions(rule, &predictions, &ctx)
}

pub(crate) fn max_mean(predictions: &[Prediction]) -> f64 {
    predictions
        .iter()
        .map(|p| p.mean)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// UCB value at an arbitrary point.
pub fn ucb_score(posterior: &GpPosterior, x: &Point, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Input(format!("beta must be nonnegative, got {beta}")));
    }
    Ok(ucb_value(&posterior.predict(x)?, beta))
}
