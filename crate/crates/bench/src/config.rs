//! Experiment configuration: a TOML document, `schema_version = 1`.
//!
//! Parsing is strict. Unknown keys are rejected, every missing required
//! field is reported in one pass, and each problem carries its dotted path.
//! The full schema is documented in `docs/config-schema.md`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gpucb::{AcquisitionRule, BetaSchedule, Kernel, KernelFamily, MaternNu, RkhsSpec};
use toml::{Table, Value};

use crate::error::{ConfigError, ConfigIssue};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// Cartesian grid, `points_per_dim` points per axis spanning each `(lo, hi)`.
    Grid {
        points_per_dim: usize,
        bounds: Vec<(f64, f64)>,
    },
    Dataset(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RkhsSetup {
    /// Centers and coefficients drawn per environment seed, scaled to `norm_bound`.
    Random { centers: usize, norm_bound: f64 },
    Explicit(RkhsSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    SampledGp,
    Rkhs(RkhsSetup),
    Tabular,
}

impl EnvironmentSpec {
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            EnvironmentSpec::SampledGp | EnvironmentSpec::Rkhs(RkhsSetup::Random { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    FiniteBayesian { delta: f64 },
    RkhsAgnostic {
        delta: f64,
        norm_bound: f64,
        noise_bound: f64,
    },
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    Ucb(ScheduleSpec),
    ExpectedImprovement { xi: f64 },
    ProbabilityOfImprovement { xi: f64 },
    MaxVariance,
    MaxMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub label: String,
    pub kind: RuleKind,
}

impl RuleSpec {
    /// Concrete rule for a pool of `domain_size` arms (`|D|` of the finite schedule).
    pub fn build(&self, domain_size: usize) -> gpucb::Result<AcquisitionRule> {
        let rule = match self.kind {
            RuleKind::Ucb(ScheduleSpec::FiniteBayesian { delta }) => {
                AcquisitionRule::Ucb(BetaSchedule::finite_bayesian(domain_size, delta)?)
            }
            RuleKind::Ucb(ScheduleSpec::RkhsAgnostic {
                delta,
                norm_bound,
                noise_bound,
            }) => AcquisitionRule::Ucb(BetaSchedule::rkhs_agnostic(delta, norm_bound, noise_bound)?),
            RuleKind::Ucb(ScheduleSpec::Constant(b)) => {
                AcquisitionRule::Ucb(BetaSchedule::constant(b)?)
            }
            RuleKind::ExpectedImprovement { xi } => AcquisitionRule::ExpectedImprovement { xi },
            RuleKind::ProbabilityOfImprovement { xi } => {
                AcquisitionRule::ProbabilityOfImprovement { xi }
            }
            RuleKind::MaxVariance => AcquisitionRule::MaxVariance,
            RuleKind::MaxMean => AcquisitionRule::MaxMean,
        };
        rule.validate()?;
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kernel: Kernel,
    pub domain: DomainSpec,
    pub environment: EnvironmentSpec,
    /// Environment seeds; `[0]` for deterministic environments.
    pub env_seeds: Vec<u64>,
    pub env_noise_variance: f64,
    pub model_noise_variance: f64,
    pub rules: Vec<RuleSpec>,
    pub horizon: u64,
    pub run_seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// `|D|` when it is known without reading a dataset.
    pub fn domain_size(&self) -> Option<usize> {
        match &self.domain {
            DomainSpec::Grid {
                points_per_dim,
                bounds,
            } => Some(points_per_dim.pow(bounds.len() as u32)),
            DomainSpec::Dataset(_) => None,
        }
    }

    pub fn run_count(&self) -> usize {
        self.rules.len() * self.env_seeds.len() * self.run_seeds.len()
    }

    /// Shifts every environment and run seed by `offset` (wrapping).
    pub fn apply_seed_offset(&mut self, offset: u64) {
        if self.environment.is_random() {
            for s in &mut self.env_seeds {
                *s = s.wrapping_add(offset);
            }
        }
        for s in &mut self.run_seeds {
            *s = s.wrapping_add(offset);
        }
    }

    /// Resolves a relative dataset path against `base`.
    pub fn rebase_dataset(&mut self, base: &Path) {
        if let DomainSpec::Dataset(p) = &mut self.domain {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Reads and validates a config file; relative dataset paths are taken
/// relative to the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, crate::error::BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::single(path.display().to_string(), format!("cannot read config: {e}"))
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = path.parent() {
        cfg.rebase_dataset(dir);
    }
    Ok(cfg)
}

#[derive(Default)]
struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn missing(&mut self, path: String) {
        self.push(path, "missing required field");
    }
}

/// A TOML table whose reads are tracked so leftovers can be reported as unknown.
struct Section<'a> {
    path: String,
    table: &'a Table,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Section<'a> {
    fn new(path: impl Into<String>, table: &'a Table) -> Self {
        Self {
            path: path.into(),
            table,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn at(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn typed<T>(
        &self,
        key: &str,
        required: bool,
        what: &str,
        issues: &mut Issues,
        conv: impl Fn(&'a Value) -> Option<T>,
    ) -> Option<T> {
        match self.raw(key) {
            None => {
                if required {
                    issues.missing(self.at(key));
                }
                None
            }
            Some(v) => {
                let out = conv(v);
                if out.is_none() {
                    issues.push(self.at(key), format!("expected {what}, found {}", v.type_str()));
                }
                out
            }
        }
    }

    fn float(&self, key: &str, required: bool, issues: &mut Issues) -> Option<f64> {
        self.typed(key, required, "a number", issues, as_f64)
    }

    fn uint(&self, key: &str, required: bool, issues: &mut Issues) -> Option<u64> {
        self.typed(key, required, "a nonnegative integer", issues, as_u64)
    }

    fn string(&self, key: &str, required: bool, issues: &mut Issues) -> Option<&'a str> {
        self.typed(key, required, "a string", issues, Value::as_str)
    }

    fn uint_list(&self, key: &str, required: bool, issues: &mut Issues) -> Option<Vec<u64>> {
        self.typed(key, required, "an array of nonnegative integers", issues, |v| {
            v.as_array()?.iter().map(as_u64).collect()
        })
    }

    fn float_list(&self, key: &str, required: bool, issues: &mut Issues) -> Option<Vec<f64>> {
        self.typed(key, required, "an array of numbers", issues, |v| {
            v.as_array()?.iter().map(as_f64).collect()
        })
    }

    fn table(&self, key: &str, required: bool, issues: &mut Issues) -> Option<Section<'a>> {
        self.typed(key, required, "a table", issues, Value::as_table)
            .map(|t| Section::new(self.at(key), t))
    }

    fn finish(self, issues: &mut Issues) {
        let used = self.used.borrow();
        for key in self.table.keys().filter(|k| !used.contains(*k)) {
            issues.push(self.at(key), "unknown field");
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_u64(v: &Value) -> Option<u64> {
    v.as_integer().and_then(|i| u64::try_from(i).ok())
}

fn check_unique(path: String, seeds: &[u64], issues: &mut Issues) {
    let mut seen = BTreeSet::new();
    for s in seeds {
        if !seen.insert(*s) {
            issues.push(path.clone(), format!("seed {s} is listed more than once"));
            return;
        }
    }
}

fn positive(path: String, v: f64, issues: &mut Issues) {
    if !(v > 0.0) || !v.is_finite() {
        issues.push(path, format!("must be positive and finite, got {v}"));
    }
}

fn nonneg(path: String, v: f64, issues: &mut Issues) {
    if !(v >= 0.0) || !v.is_finite() {
        issues.push(path, format!("must be nonnegative and finite, got {v}"));
    }
}

fn check_delta(path: String, v: f64, issues: &mut Issues) {
    if !(v > 0.0 && v < 1.0) {
        issues.push(path, format!("delta must lie in (0, 1), got {v}"));
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc: Table = toml::from_str(text)
        .map_err(|e| ConfigError::single("<document>", e.to_string().trim().to_string()))?;
    let mut issues = Issues::default();
    let root = Section::new("", &doc);

    match root.raw("schema_version") {
        None => issues.missing("schema_version".into()),
        Some(v) if v.as_integer() == Some(SCHEMA_VERSION) => {}
        Some(v) => issues.push(
            "schema_version",
            format!("unsupported schema version {v}; this build reads version {SCHEMA_VERSION}"),
        ),
    }

    let horizon = root.uint("horizon", true, &mut issues);
    if horizon == Some(0) {
        issues.push("horizon", "must be at least 1");
    }
    let run_seeds = root.uint_list("run_seeds", true, &mut issues);
    if let Some(s) = &run_seeds {
        if s.is_empty() {
            issues.push("run_seeds", "must list at least one seed");
        }
        check_unique("run_seeds".into(), s, &mut issues);
    }
    let model_noise = root.float("model_noise_variance", true, &mut issues);
    if let Some(v) = model_noise {
        positive("model_noise_variance".into(), v, &mut issues);
    }
    let output_dir = root.string("output_dir", false, &mut issues).map(PathBuf::from);

    let kernel = root
        .table("kernel", true, &mut issues)
        .and_then(|s| parse_kernel(s, &mut issues));
    let domain = root
        .table("domain", true, &mut issues)
        .and_then(|s| parse_domain(s, &mut issues));
    let env = root
        .table("environment", true, &mut issues)
        .and_then(|s| parse_environment(s, &mut issues));
    let rules = parse_rules(&root, &mut issues);
    root.finish(&mut issues);

    if let (Some(DomainSpec::Grid { .. }), Some((EnvironmentSpec::Tabular, ..))) = (&domain, &env) {
        issues.push(
            "environment.kind",
            "a tabular environment needs domain.dataset, not domain.grid",
        );
    }

    if !issues.0.is_empty() {
        return Err(ConfigError { issues: issues.0 });
    }
    let (environment, env_seeds, env_noise_variance) = env.expect("validated");
    Ok(ExperimentConfig {
        kernel: kernel.expect("validated"),
        domain: domain.expect("validated"),
        environment,
        env_seeds,
        env_noise_variance,
        model_noise_variance: model_noise.expect("validated"),
        rules: rules.expect("validated"),
        horizon: horizon.expect("validated"),
        run_seeds: run_seeds.expect("validated"),
        output_dir,
    })
}

fn parse_kernel(s: Section<'_>, issues: &mut Issues) -> Option<Kernel> {
    let family = s.string("family", true, issues);
    let signal_variance = s.float("signal_variance", false, issues).unwrap_or(1.0);
    positive(s.at("signal_variance"), signal_variance, issues);
    let family = match family {
        Some("linear") => Some(KernelFamily::Linear),
        Some("squared_exponential") => Some(KernelFamily::SquaredExponential),
        Some("matern") => match s.float("nu", true, issues) {
            Some(nu) => match MaternNu::from_value(nu) {
                Ok(nu) => Some(KernelFamily::Matern(nu)),
                Err(_) => {
                    issues.push(s.at("nu"), format!("must be one of 0.5, 1.5, 2.5, got {nu}"));
                    None
                }
            },
            None => None,
        },
        Some(other) => {
            issues.push(
                s.at("family"),
                format!("unknown kernel family {other:?} (linear, squared_exponential, matern)"),
            );
            None
        }
        None => None,
    };
    let lengthscale = match family {
        Some(KernelFamily::Linear) | None => 1.0,
        Some(_) => {
            let l = s.float("lengthscale", true, issues);
            if let Some(l) = l {
                positive(s.at("lengthscale"), l, issues);
            }
            l.unwrap_or(1.0)
        }
    };
    s.finish(issues);
    Kernel::new(family?, lengthscale, signal_variance).ok()
}

fn parse_domain(s: Section<'_>, issues: &mut Issues) -> Option<DomainSpec> {
    let has_grid = s.has("grid");
    let has_dataset = s.has("dataset");
    let out = match (has_grid, has_dataset) {
        (true, true) => {
            issues.push(s.at("grid"), "domain.grid and domain.dataset are mutually exclusive");
            issues.push(s.at("dataset"), "domain.grid and domain.dataset are mutually exclusive");
            s.raw("grid");
            s.raw("dataset");
            None
        }
        (false, false) => {
            issues.push(s.path.clone(), "needs exactly one of domain.grid or domain.dataset");
            None
        }
        (false, true) => s
            .string("dataset", true, issues)
            .map(|p| DomainSpec::Dataset(PathBuf::from(p))),
        (true, false) => s.table("grid", true, issues).and_then(|g| parse_grid(g, issues)),
    };
    s.finish(issues);
    out
}

fn parse_grid(g: Section<'_>, issues: &mut Issues) -> Option<DomainSpec> {
    let points = g.uint("points_per_dim", true, issues);
    if points == Some(0) {
        issues.push(g.at("points_per_dim"), "must be at least 1");
    }
    let dimension = g.uint("dimension", false, issues);
    let bounds = g.typed("bounds", false, "an array of [lo, hi] pairs", issues, |v| {
        v.as_array()?
            .iter()
            .map(|pair| {
                let pair = pair.as_array()?;
                if pair.len() != 2 {
                    return None;
                }
                Some((as_f64(&pair[0])?, as_f64(&pair[1])?))
            })
            .collect::<Option<Vec<_>>>()
    });
    let bounds = match (dimension, bounds) {
        (None, None) => {
            issues.push(g.at("dimension"), "missing: give dimension or bounds");
            None
        }
        (Some(d), None) => Some(vec![(0.0, 1.0); d as usize]),
        (None, Some(b)) => Some(b),
        (Some(d), Some(b)) => {
            if b.len() as u64 != d {
                issues.push(
                    g.at("bounds"),
                    format!("{} bound pairs for dimension {d}", b.len()),
                );
            }
            Some(b)
        }
    };
    if let Some(b) = &bounds {
        if b.is_empty() {
            issues.push(g.at("bounds"), "dimension must be at least 1");
        }
        for (i, (lo, hi)) in b.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                issues.push(g.at("bounds"), format!("pair {i} must satisfy lo ≤ hi, got [{lo}, {hi}]"));
            }
        }
    }
    g.finish(issues);
    Some(DomainSpec::Grid {
        points_per_dim: points? as usize,
        bounds: bounds?,
    })
}

fn parse_environment(
    s: Section<'_>,
    issues: &mut Issues,
) -> Option<(EnvironmentSpec, Vec<u64>, f64)> {
    let kind = s.string("kind", true, issues);
    let noise = s.float("noise_variance", true, issues);
    if let Some(v) = noise {
        nonneg(s.at("noise_variance"), v, issues);
    }
    let spec = match kind {
        Some("sampled_gp") => Some(EnvironmentSpec::SampledGp),
        Some("tabular") => Some(EnvironmentSpec::Tabular),
        Some("rkhs") => s
            .table("rkhs", true, issues)
            .and_then(|r| parse_rkhs(r, issues))
            .map(EnvironmentSpec::Rkhs),
        Some(other) => {
            issues.push(
                s.at("kind"),
                format!("unknown environment kind {other:?} (sampled_gp, rkhs, tabular)"),
            );
            None
        }
        None => None,
    };
    // Decided from the raw keys so a broken rkhs table still gets its seeds checked.
    let random_rkhs = s
        .table
        .get("rkhs")
        .and_then(Value::as_table)
        .is_some_and(|t| t.contains_key("random_centers"));
    let needs_seeds = match kind {
        Some("sampled_gp") => Some(true),
        Some("rkhs") => Some(random_rkhs),
        Some("tabular") => Some(false),
        _ => None,
    };
    let seeds = match needs_seeds {
        Some(true) => {
            let seeds = s.uint_list("seeds", true, issues);
            if let Some(list) = &seeds {
                if list.is_empty() {
                    issues.push(s.at("seeds"), "must list at least one seed");
                }
                check_unique(s.at("seeds"), list, issues);
            }
            seeds
        }
        Some(false) => {
            if s.has("seeds") {
                s.raw("seeds");
                issues.push(s.at("seeds"), "this environment is deterministic and takes no seeds");
            }
            Some(vec![0])
        }
        None => {
            s.raw("seeds");
            None
        }
    };
    if kind != Some("rkhs") && s.has("rkhs") {
        s.raw("rkhs");
        issues.push(s.at("rkhs"), "only valid when kind = \"rkhs\"");
    }
    s.finish(issues);
    Some((spec?, seeds?, noise?))
}

fn parse_rkhs(r: Section<'_>, issues: &mut Issues) -> Option<RkhsSetup> {
    let bound = r.float("norm_bound", true, issues);
    if let Some(b) = bound {
        nonneg(r.at("norm_bound"), b, issues);
    }
    let random = r.uint("random_centers", false, issues);
    let centers = r.uint_list("centers", false, issues);
    let coefficients = r.float_list("coefficients", false, issues);
    let out = match (random, centers, coefficients) {
        (Some(n), None, None) => {
            if n == 0 {
                issues.push(r.at("random_centers"), "must be at least 1");
            }
            Some(RkhsSetup::Random {
                centers: n as usize,
                norm_bound: bound?,
            })
        }
        (None, Some(c), Some(a)) => {
            match RkhsSpec::new(c.iter().map(|&i| i as usize).collect(), a, bound.unwrap_or(0.0)) {
                Ok(spec) => bound.map(|_| RkhsSetup::Explicit(spec)),
                Err(e) => {
                    issues.push(r.at("coefficients"), e.to_string());
                    None
                }
            }
        }
        (None, None, None) => {
            issues.push(
                r.at("random_centers"),
                "missing: give random_centers, or centers and coefficients",
            );
            None
        }
        _ => {
            issues.push(
                r.path.clone(),
                "use either random_centers or centers + coefficients",
            );
            None
        }
    };
    r.finish(issues);
    out
}

fn parse_rules(root: &Section<'_>, issues: &mut Issues) -> Option<Vec<RuleSpec>> {
    let list = root.typed("acquisition", true, "an array of tables", issues, |v| {
        v.as_array()?.iter().map(Value::as_table).collect::<Option<Vec<_>>>()
    })?;
    if list.is_empty() {
        issues.push("acquisition", "must contain at least one rule");
    }
    let mut rules = Vec::new();
    let mut labels = BTreeSet::new();
    let mut ok = true;
    for (i, t) in list.into_iter().enumerate() {
        let s = Section::new(format!("acquisition[{i}]"), t);
        match parse_rule(&s, issues) {
            Some(rule) => {
                if !labels.insert(rule.label.clone()) {
                    issues.push(s.at("label"), format!("duplicate rule label {:?}", rule.label));
                }
                rules.push(rule);
            }
            None => ok = false,
        }
        s.finish(issues);
    }
    ok.then_some(rules)
}

fn parse_rule(s: &Section<'_>, issues: &mut Issues) -> Option<RuleSpec> {
    let name = s.string("rule", true, issues)?;
    let label = s.string("label", false, issues);
    let xi = |issues: &mut Issues| {
        let xi = s.float("xi", false, issues).unwrap_or(0.0);
        nonneg(s.at("xi"), xi, issues);
        xi
    };
    let kind = match name {
        "ucb" => {
            let schedule = s.string("schedule", true, issues)?;
            let delta = |issues: &mut Issues| {
                let d = s.float("delta", true, issues);
                if let Some(d) = d {
                    check_delta(s.at("delta"), d, issues);
                }
                d
            };
            let spec = match schedule {
                "finite_bayesian" => ScheduleSpec::FiniteBayesian {
                    delta: delta(issues)?,
                },
                "rkhs_agnostic" => {
                    let d = delta(issues);
                    let b = s.float("norm_bound", true, issues);
                    let r = s.float("noise_bound", true, issues);
                    if let Some(b) = b {
                        nonneg(s.at("norm_bound"), b, issues);
                    }
                    if let Some(r) = r {
                        nonneg(s.at("noise_bound"), r, issues);
                    }
                    ScheduleSpec::RkhsAgnostic {
                        delta: d?,
                        norm_bound: b?,
                        noise_bound: r?,
                    }
                }
                "constant" => {
                    let b = s.float("beta", true, issues)?;
                    nonneg(s.at("beta"), b, issues);
                    ScheduleSpec::Constant(b)
                }
                other => {
                    issues.push(
                        s.at("schedule"),
                        format!(
                            "unknown schedule {other:?} (finite_bayesian, rkhs_agnostic, constant)"
                        ),
                    );
                    return None;
                }
            };
            RuleKind::Ucb(spec)
        }
        "ei" => RuleKind::ExpectedImprovement { xi: xi(issues) },
        "pi" => RuleKind::ProbabilityOfImprovement { xi: xi(issues) },
        "max_variance" => RuleKind::MaxVariance,
        "max_mean" => RuleKind::MaxMean,
        other => {
            issues.push(
                s.at("rule"),
                format!("unknown rule {other:?} (ucb, ei, pi, max_variance, max_mean)"),
            );
            return None;
        }
    };
    let default_label = match kind {
        RuleKind::Ucb(ScheduleSpec::FiniteBayesian { .. }) => "ucb-finite_bayesian",
        RuleKind::Ucb(ScheduleSpec::RkhsAgnostic { .. }) => "ucb-rkhs_agnostic",
        RuleKind::Ucb(ScheduleSpec::Constant(_)) => "ucb-constant",
        RuleKind::ExpectedImprovement { .. } => "ei",
        RuleKind::ProbabilityOfImprovement { .. } => "pi",
        RuleKind::MaxVariance => "max_variance",
        RuleKind::MaxMean => "max_mean",
    };
    let label = label.unwrap_or(default_label).to_string();
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
    {
        issues.push(s.at("label"), "labels may only use [A-Za-z0-9._-]");
    }
    Some(RuleSpec { label, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
horizon = 50
run_seeds = [1]
model_noise_variance = 0.025

[kernel]
family = "squared_exponential"
lengthscale = 0.2

[domain.grid]
points_per_dim = 100
bounds = [[0.0, 1.0]]

[environment]
kind = "sampled_gp"
seeds = [7]
noise_variance = 0.025

[[acquisition]]
rule = "ucb"
schedule = "finite_bayesian"
delta = 0.1
"#;

    #[test]
    fn minimal_config() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.domain_size(), Some(100));
        assert_eq!(cfg.horizon, 50);
        assert_eq!(cfg.kernel.signal_variance(), 1.0);
        let rule = cfg.rules[0].build(cfg.domain_size().unwrap()).unwrap();
        assert_eq!(
            rule,
            AcquisitionRule::Ucb(BetaSchedule::FiniteBayesian {
                domain_size: 100,
                delta: 0.1
            })
        );
        assert_eq!(cfg.rules[0].label, "ucb-finite_bayesian");
        assert_eq!(cfg.run_count(), 1);
    }

    #[test]
    fn grid_and_dataset_conflict() {
        let text = MINIMAL.replace("[domain.grid]", "[domain]\ndataset = \"x.csv\"\n[domain.grid]");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("domain.grid"), "{err}");
        assert!(err.mentions("domain.dataset"), "{err}");
    }

    #[test]
    fn delta_out_of_range() {
        let err = parse_config(&MINIMAL.replace("delta = 0.1", "delta = 1.5")).unwrap_err();
        assert!(err.mentions("acquisition[0].delta"));
        assert!(err.to_string().contains("(0, 1)"));
    }

    #[test]
    fn missing_fields_reported_together() {
        let text = MINIMAL
            .replace("horizon = 50\n", "")
            .replace("lengthscale = 0.2\n", "")
            .replace("seeds = [7]\nnoise_variance = 0.025\n", "seeds = [7]\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("horizon"));
        assert!(err.mentions("kernel.lengthscale"));
        assert!(err.mentions("environment.noise_variance"));
        assert_eq!(err.issues.len(), 3, "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("lengthscale = 0.2", "lengthscale = 0.2\nperiod = 3");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("kernel.period"));
        let text = MINIMAL.replace("delta = 0.1", "delta = 0.1\nxi = 0.1");
        assert!(parse_config(&text).unwrap_err().mentions("acquisition[0].xi"));
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let err = parse_config(&MINIMAL.replace("run_seeds = [1]", "run_seeds = [1, 2, 1]"))
            .unwrap_err();
        assert!(err.mentions("run_seeds"));
    }

    #[test]
    fn tabular_rejects_seeds_and_grid() {
        let text = MINIMAL.replace("kind = \"sampled_gp\"", "kind = \"tabular\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("environment.seeds"));
        assert!(err.mentions("environment.kind"));
    }

    #[test]
    fn schema_version_checked() {
        let err = parse_config(&MINIMAL.replace("schema_version = 1", "schema_version = 2"))
            .unwrap_err();
        assert!(err.mentions("schema_version"));
    }

    #[test]
    fn malformed_document() {
        let err = parse_config("horizon = = 3").unwrap_err();
        assert!(err.mentions("<document>"));
    }

    #[test]
    fn matern_kernel_with_rkhs_environment() {
        let text = MINIMAL
            .replace(
                "family = \"squared_exponential\"",
                "family = \"matern\"\nnu = 2.5",
            )
            .replace(
                "\n[[acquisition]]",
                "[environment.rkhs]\nnorm_bound = 2.0\nrandom_centers = 5\n\n[[acquisition]]",
            )
            .replace("kind = \"sampled_gp\"", "kind = \"rkhs\"");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.kernel.family(), KernelFamily::Matern(MaternNu::FiveHalves));
        assert_eq!(
            cfg.environment,
            EnvironmentSpec::Rkhs(RkhsSetup::Random {
                centers: 5,
                norm_bound: 2.0
            })
        );
        let bad = text.replace("nu = 2.5", "nu = 2.0");
        assert!(parse_config(&bad).unwrap_err().mentions("kernel.nu"));
        let stray = text.replace("random_centers = 5", "random_centers = 5\ncenters = [1]");
        assert!(parse_config(&stray).unwrap_err().mentions("environment.rkhs"));
    }

    #[test]
    fn seed_offset_shifts_random_seeds() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.apply_seed_offset(10);
        assert_eq!(cfg.env_seeds, vec![17]);
        assert_eq!(cfg.run_seeds, vec![11]);
    }
}
