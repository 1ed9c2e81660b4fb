//! Gaussian-process bandit optimization.
//!
//! * [`kernel`]: covariance functions, Gram matrices, eigenspectra.
//! * [`gp`]: exact GP posteriors with incremental Cholesky updates, prior sampling.
//! * [`acquisition`]: the GP-UCB rule, its `β_t` schedules, and EI / PI /
//!   max-variance / max-mean for comparison.
//! * [`info_gain`]: information gain of observation sets, greedy experimental
//!   design and per-path gain traces.
//! * [`bandit`]: ground-truth environments, the interaction loop and regret accounting.

pub mod acquisition;
pub mod bandit;
pub mod error;
pub mod gp;
pub mod info_gain;
pub mod kernel;
pub mod linalg;
pub mod rng;

pub use acquisition::{AcquisitionRule, BetaSchedule, Selection};
pub use bandit::{Environment, EnvironmentKind, RkhsSpec, RoundRecord, RunError, RunTrace};
pub use error::{Error, Result};
pub use gp::{GpPosterior, Observation, PoolPosterior, Prediction};
pub use info_gain::{GreedyDesign, InfoGainTrace};
pub use kernel::{GramMatrix, Kernel, KernelFamily, MaternNu, Point, Spectrum};
