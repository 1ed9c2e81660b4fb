//! Sweep execution: every rule × environment seed × run seed.
//!
//! Jobs run on a rayon pool but results are gathered in job order, so the
//! files written for a config depend only on the config and the seed offset.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use gpucb::info_gain::greedy_gamma;
use gpucb::{Environment, GramMatrix, Kernel, Point, RkhsSpec, RunTrace};
use rayon::prelude::*;

use crate::config::{DomainSpec, EnvironmentSpec, ExperimentConfig, RkhsSetup};
use crate::error::{BenchError, IngestError};
use crate::table::ingest_table;
use crate::trace::write_trace;

/// The candidate pool, plus the dataset values when the domain came from a file.
#[derive(Debug, Clone)]
pub struct Domain {
    pub pool: Vec<Point>,
    pub values: Option<Vec<f64>>,
}

/// Grid points in row-major order: the last coordinate varies fastest.
pub fn grid_points(points_per_dim: usize, bounds: &[(f64, f64)]) -> Vec<Point> {
    let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
        if points_per_dim == 1 {
            return vec![lo];
        }
        let step = (hi - lo) / (points_per_dim - 1) as f64;
        (0..points_per_dim)
            .map(|i| if i + 1 == points_per_dim { hi } else { lo + step * i as f64 })
            .collect()
    };
    let axes: Vec<Vec<f64>> = bounds.iter().map(axis).collect();
    let total = points_per_dim.pow(bounds.len() as u32);
    (0..total)
        .map(|mut flat| {
            let mut coords = vec![0.0; axes.len()];
            for (c, ax) in coords.iter_mut().zip(&axes).rev() {
                *c = ax[flat % points_per_dim];
                flat /= points_per_dim;
            }
            Point::new(coords).expect("grid coordinates are finite")
        })
        .collect()
}

pub fn load_domain(cfg: &ExperimentConfig) -> Result<Domain, BenchError> {
    match &cfg.domain {
        DomainSpec::Grid {
            points_per_dim,
            bounds,
        } => Ok(Domain {
            pool: grid_points(*points_per_dim, bounds),
            values: None,
        }),
        DomainSpec::Dataset(path) => {
            let rows = ingest_table(path)?;
            let (pool, values) = rows.into_iter().unzip();
            Ok(Domain {
                pool,
                values: Some(values),
            })
        }
    }
}

pub fn build_environment(
    cfg: &ExperimentConfig,
    domain: &Domain,
    env_seed: u64,
) -> Result<Environment, BenchError> {
    let pool = domain.pool.clone();
    let k = &cfg.kernel;
    let noise = cfg.env_noise_variance;
    let env = match &cfg.environment {
        EnvironmentSpec::SampledGp => Environment::sampled_gp(k, pool, noise, env_seed)?,
        EnvironmentSpec::Rkhs(RkhsSetup::Random {
            centers,
            norm_bound,
        }) => {
            let spec = RkhsSpec::random(k, &pool, *centers, *norm_bound, env_seed)?;
            Environment::rkhs(k, pool, spec, noise)?
        }
        EnvironmentSpec::Rkhs(RkhsSetup::Explicit(spec)) => {
            Environment::rkhs(k, pool, spec.clone(), noise)?
        }
        EnvironmentSpec::Tabular => {
            let values = domain
                .values
                .clone()
                .expect("tabular environments are validated to use a dataset");
            let rows = pool.into_iter().zip(values).collect();
            Environment::tabular(rows, noise).map_err(|e| match (e, &cfg.domain) {
                (gpucb::Error::Ingestion { row, message }, DomainSpec::Dataset(p)) => {
                    BenchError::Ingest(IngestError::Cell {
                        path: p.clone(),
                        row,
                        column: "x".into(),
                        message,
                    })
                }
                (other, _) => other.into(),
            })?
        }
    };
    Ok(env)
}

#[derive(Debug, Clone)]
pub struct Job {
    pub rule: usize,
    pub env_seed: u64,
    pub run_seed: u64,
}

impl Job {
    pub fn trace_name(&self, label: &str) -> String {
        format!("{label}__env{}__run{}.csv", self.env_seed, self.run_seed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub job: Job,
    pub label: String,
    pub trace: RunTrace,
    /// `(round, message)` when the run stopped early; `trace` then holds the
    /// rounds completed before the failure.
    pub failure: Option<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSummary {
    pub label: String,
    pub rule: String,
    pub runs: usize,
    pub failed: usize,
    pub regret_cum_mean: f64,
    /// Standard error of the mean; `None` with fewer than two runs.
    pub regret_cum_se: Option<f64>,
    /// `(c, mean R_c / c)` at each checkpoint.
    pub avg_regret: Vec<(u64, f64)>,
    pub info_gain_mean: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kernel: Kernel,
    pub pool: Vec<Point>,
    pub outcomes: Vec<RunOutcome>,
    pub summaries: Vec<RuleSummary>,
    pub checkpoints: Vec<u64>,
    /// Greedy information gain of `min(horizon, |D|)` pool points.
    pub gamma_greedy: f64,
    pub gamma_steps: usize,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.failure.is_some()).count()
    }
}

/// Checkpoints `max(1, T/10)`, `max(1, T/2)` and `T`, deduplicated.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut c = vec![(horizon / 10).max(1), (horizon / 2).max(1), horizon];
    c.dedup();
    c
}

pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::with_capacity(cfg.run_count());
    for rule in 0..cfg.rules.len() {
        for &env_seed in &cfg.env_seeds {
            for &run_seed in &cfg.run_seeds {
                out.push(Job {
                    rule,
                    env_seed,
                    run_seed,
                });
            }
        }
    }
    out
}

/// Runs the whole sweep in memory.
pub fn execute(cfg: &ExperimentConfig, workers: usize) -> Result<SweepReport, BenchError> {
    let domain = load_domain(cfg)?;
    let n = domain.pool.len();
    let rules = cfg
        .rules
        .iter()
        .map(|r| r.build(n))
        .collect::<gpucb::Result<Vec<_>>>()?;
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Numerical(format!("cannot start worker pool: {e}")))?;

    let (envs, outcomes, gamma) = threads.install(|| {
        let envs = cfg
            .env_seeds
            .par_iter()
            .map(|&s| build_environment(cfg, &domain, s))
            .collect::<Result<Vec<_>, _>>()?;
        let outcomes: Vec<RunOutcome> = jobs(cfg)
            .into_par_iter()
            .map(|job| {
                let env_pos = cfg.env_seeds.iter().position(|&s| s == job.env_seed).unwrap();
                let env = &envs[env_pos];
                let result = gpucb::bandit::run(
                    env,
                    &rules[job.rule],
                    &cfg.kernel,
                    cfg.model_noise_variance,
                    cfg.horizon,
                    job.run_seed,
                );
                let (trace, failure) = match result {
                    Ok(t) => (t, None),
                    Err(e) => (e.partial, Some((e.round, e.source.to_string()))),
                };
                RunOutcome {
                    label: cfg.rules[job.rule].label.clone(),
                    job,
                    trace,
                    failure,
                }
            })
            .collect();
        let steps = (cfg.horizon as usize).min(n);
        let gram = GramMatrix::new(&cfg.kernel, &domain.pool)?;
        let gamma = greedy_gamma(&gram, steps, cfg.model_noise_variance)?;
        Ok::<_, BenchError>((envs, outcomes, gamma))
    })?;
    drop(envs);

    let checkpoints = checkpoints(cfg.horizon);
    let summaries = cfg
        .rules
        .iter()
        .zip(&rules)
        .enumerate()
        .map(|(i, (spec, rule))| {
            let mine: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.job.rule == i).collect();
            summarize(&spec.label, &rule.to_string(), &mine, &checkpoints)
        })
        .collect();
    Ok(SweepReport {
        kernel: cfg.kernel,
        pool: domain.pool,
        outcomes,
        summaries,
        checkpoints,
        gamma_steps: gamma.indices.len(),
        gamma_greedy: gamma.gain,
    })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn summarize(label: &str, rule: &str, runs: &[&RunOutcome], checkpoints: &[u64]) -> RuleSummary {
    let ok: Vec<&RunTrace> = runs
        .iter()
        .filter(|o| o.failure.is_none())
        .map(|o| &o.trace)
        .collect();
    let totals: Vec<f64> = ok.iter().map(|t| t.cumulative_regret()).collect();
    let m = mean(&totals);
    let se = (totals.len() >= 2).then(|| {
        let var = totals.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (totals.len() - 1) as f64;
        (var / totals.len() as f64).sqrt()
    });
    let avg_regret = checkpoints
        .iter()
        .map(|&c| {
            let vals: Vec<f64> = ok
                .iter()
                .filter_map(|t| t.average_regret_at(c as usize))
                .collect();
            (c, mean(&vals))
        })
        .collect();
    let gains: Vec<f64> = ok.iter().map(|t| t.info_gain()).collect();
    RuleSummary {
        label: label.to_string(),
        rule: rule.to_string(),
        runs: ok.len(),
        failed: runs.len() - ok.len(),
        regret_cum_mean: m,
        regret_cum_se: se,
        avg_regret,
        info_gain_mean: mean(&gains),
    }
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |e| BenchError::io(path, e.into())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finite(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Writes `traces/`, `manifest.csv` and `summary.csv` under `out`.
pub fn write_outputs(report: &SweepReport, out: &Path) -> Result<(), BenchError> {
    let traces = out.join("traces");
    fs::create_dir_all(&traces).map_err(|e| BenchError::io(&traces, e))?;

    for o in &report.outcomes {
        let path = traces.join(o.job.trace_name(&o.label));
        let file = File::create(&path).map_err(|e| BenchError::io(&path, e))?;
        write_trace(file, &o.trace, &report.pool).map_err(csv_io(&path))?;
    }

    let path = out.join("manifest.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_io(&path))?;
    w.write_record([
        "label",
        "env_seed",
        "run_seed",
        "status",
        "rounds",
        "failed_round",
        "message",
        "trace",
    ])
    .map_err(csv_io(&path))?;
    for o in &report.outcomes {
        let (status, round, msg) = match &o.failure {
            None => ("ok", String::new(), String::new()),
            Some((r, m)) => ("failed", r.to_string(), m.clone()),
        };
        let trace_rel: PathBuf = ["traces", &o.job.trace_name(&o.label)].iter().collect();
        w.write_record([
            o.label.clone(),
            o.job.env_seed.to_string(),
            o.job.run_seed.to_string(),
            status.to_string(),
            o.trace.len().to_string(),
            round,
            msg,
            trace_rel.to_string_lossy().replace('\\', "/"),
        ])
        .map_err(csv_io(&path))?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))?;

    let path = out.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_io(&path))?;
    let mut head: Vec<String> = [
        "label",
        "rule",
        "kernel",
        "runs",
        "failed",
        "regret_cum_mean",
        "regret_cum_se",
    ]
    .map(String::from)
    .to_vec();
    head.extend(report.checkpoints.iter().map(|c| format!("avg_regret_t{c}")));
    head.extend(["info_gain_mean", "gamma_greedy", "gamma_steps"].map(String::from));
    w.write_record(&head).map_err(csv_io(&path))?;
    for s in &report.summaries {
        let mut rec = vec![
            s.label.clone(),
            s.rule.clone(),
            report.kernel.to_string(),
            s.runs.to_string(),
            s.failed.to_string(),
            finite(s.regret_cum_mean),
            opt(s.regret_cum_se),
        ];
        rec.extend(s.avg_regret.iter().map(|(_, v)| finite(*v)));
        rec.extend([
            finite(s.info_gain_mean),
            report.gamma_greedy.to_string(),
            report.gamma_steps.to_string(),
        ]);
        w.write_record(&rec).map_err(csv_io(&path))?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))?;
    Ok(())
}

/// Executes a config and writes its outputs. Run failures are reported after
/// every file, including partial traces, has been written.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<SweepReport, BenchError> {
    let report = execute(cfg, workers)?;
    write_outputs(&report, out)?;
    match report.failures() {
        0 => Ok(report),
        failed => Err(BenchError::RunFailures {
            failed,
            total: report.outcomes.len(),
        }),
    }
}
