//! Information gain `F(A) = ½ ln det(I + σ⁻²K_A)` of observing a set of
//! points, its greedy maximization, and instrumentation of sampling paths.

use crate::error::{Error, Result};
use crate::gp::{clamp_variance, GpPosterior, Observation, PoolPosterior};
use crate::kernel::{GramMatrix, Kernel, Point};
use crate::linalg::{dot, CholeskyFactor};

/// Per-step marginal gains along a sampling path.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoGainTrace {
    pub marginal_gains: Vec<f64>,
    pub cumulative: f64,
    pub noise_variance: f64,
}

/// Outcome of greedy information-gain maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyDesign {
    pub indices: Vec<usize>,
    pub gain: f64,
    pub step_gains: Vec<f64>,
}

fn check_noise(noise_variance: f64) -> Result<()> {
    if noise_variance > 0.0 && noise_variance.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )))
    }
}

fn check_indices(g: &GramMatrix, indices: &[usize]) -> Result<()> {
    let n = g.size();
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::Input(format!("index {i} out of range (pool size {n})")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Input(format!("index {i} appears more than once")));
        }
    }
    Ok(())
}

/// Gain from `½ ln(1 + σ⁻²·variance)`, clamping round-off negatives.
pub fn gain_from_variance(variance: f64, noise_variance: f64) -> Result<f64> {
    Ok(0.5 * (clamp_variance(variance)? / noise_variance).ln_1p())
}

/// `½ ln det(I + σ⁻²K_A)` for the pool subset `indices`.
pub fn info_gain_of_set(g: &GramMatrix, indices: &[usize], noise_variance: f64) -> Result<f64> {
    check_noise(noise_variance)?;
    check_indices(g, indices)?;
    if indices.is_empty() {
        return Ok(0.0);
    }
    let mut m = g.submatrix(indices) / noise_variance;
    for i in 0..indices.len() {
        m[(i, i)] += 1.0;
    }
    let l = CholeskyFactor::factor(&m).map_err(|e| match e {
        Error::CholeskyBreakdown { pivot, value } => Error::Numerical(format!(
            "I + K/σ² is not positive definite (pivot {pivot}, value {value:e}); \
             the gram submatrix is not PSD"
        )),
        other => other,
    })?;
    let value = 0.5 * l.log_det();
    if value < -1e-10 {
        return Err(Error::Numerical(format!("negative information gain {value:e}")));
    }
    Ok(value.max(0.0))
}

/// `F(A ∪ {x}) − F(A)` computed as `½ ln(1 + σ⁻²σ²_A(x))`.
pub fn marginal_gain(
    g: &GramMatrix,
    current: &[usize],
    candidate: usize,
    noise_variance: f64,
) -> Result<f64> {
    check_noise(noise_variance)?;
    check_indices(g, current)?;
    if candidate >= g.size() {
        return Err(Error::Input(format!(
            "candidate {candidate} out of range (pool size {})",
            g.size()
        )));
    }
    if current.contains(&candidate) {
        return Err(Error::Input(format!(
            "candidate {candidate} is already in the current set"
        )));
    }
    let mut k = g.submatrix(current);
    for i in 0..current.len() {
        k[(i, i)] += noise_variance;
    }
    let l = CholeskyFactor::factor(&k)?;
    let cross: Vec<f64> = current.iter().map(|&a| g.get(a, candidate)).collect();
    let v = l.solve_lower(&cross);
    gain_from_variance(g.get(candidate, candidate) - dot(&v, &v), noise_variance)
}

/// Greedily picks `steps` distinct pool points, each maximizing the marginal
/// gain given the previous picks (ties → lowest index).
pub fn greedy_gamma(g: &GramMatrix, steps: usize, noise_variance: f64) -> Result<GreedyDesign> {
    check_noise(noise_variance)?;
    let n = g.size();
    if steps == 0 || steps > n {
        return Err(Error::Input(format!(
            "greedy design needs 1 ≤ T ≤ pool size ({n}), got T = {steps}"
        )));
    }
    let mut post = PoolPosterior::new(g, noise_variance)?;
    let mut taken = vec![false; n];
    let mut design = GreedyDesign {
        indices: Vec::with_capacity(steps),
        gain: 0.0,
        step_gains: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !taken[j]) {
            let gain = gain_from_variance(post.raw_variance(j), noise_variance)?;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((j, gain));
            }
        }
        let (j, gain) = best.expect("steps ≤ pool size leaves a candidate");
        taken[j] = true;
        post.observe(j, 0.0)?;
        design.indices.push(j);
        design.step_gains.push(gain);
        design.gain += gain;
    }
    Ok(design)
}

/// Exact `max_{|A| = steps} F(A)` by enumerating every subset (lexicographic
/// order, first maximizer kept). Exponential; intended for pools of a dozen points.
pub fn exhaustive_gamma(
    g: &GramMatrix,
    steps: usize,
    noise_variance: f64,
) -> Result<(Vec<usize>, f64)> {
    check_noise(noise_variance)?;
    let n = g.size();
    if steps == 0 || steps > n {
        return Err(Error::Input(format!(
            "exhaustive design needs 1 ≤ T ≤ pool size ({n}), got T = {steps}"
        )));
    }
    let mut combo: Vec<usize> = (0..steps).collect();
    let mut best = (combo.clone(), info_gain_of_set(g, &combo, noise_variance)?);
    loop {
        // advance to the next combination in lexicographic order
        let mut i = steps;
        while i > 0 && combo[i - 1] == n - steps + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for k in i..steps {
            combo[k] = combo[k - 1] + 1;
        }
        let value = info_gain_of_set(g, &combo, noise_variance)?;
        if value > best.1 {
            best = (combo.clone(), value);
        }
    }
    Ok(best)
}

/// Marginal gains of the points of `path`, observed in order.
pub fn trace_gain(path: &[Point], kernel: &Kernel, noise_variance: f64) -> Result<InfoGainTrace> {
    let mut post = GpPosterior::empty(*kernel, noise_variance)?;
    let mut trace = InfoGainTrace {
        marginal_gains: Vec::with_capacity(path.len()),
        cumulative: 0.0,
        noise_variance,
    };
    for x in path {
        let gain = gain_from_variance(post.predict(x)?.variance, noise_variance)?;
        post = post.update(Observation::new(x.clone(), 0.0)?)?;
        trace.marginal_gains.push(gain);
        trace.cumulative += gain;
    }
    Ok(trace)
}
