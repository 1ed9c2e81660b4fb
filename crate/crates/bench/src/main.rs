use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpucb::info_gain::{exhaustive_gamma, greedy_gamma};
use gpucb::GramMatrix;
use gpucb_bench::config::load_config;
use gpucb_bench::sweep::{load_domain, run_sweep};
use gpucb_bench::BenchError;

/// Exhaustive search is offered only for problems this small.
const EXHAUSTIVE_MAX_POOL: usize = 12;
const EXHAUSTIVE_MAX_STEPS: usize = 4;

#[derive(Parser)]
#[command(name = "gpucb", version, about = "GP-UCB experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every rule × environment seed × run seed and write CSV outputs.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Added to every environment and run seed.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Check a config (and its dataset, if any) without running.
    Validate { config: PathBuf },
    /// Greedy information gain of T pool points, with the exhaustive optimum on small pools.
    Gamma {
        config: PathBuf,
        /// Design size; defaults to min(horizon, pool size).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Eigenvalues of the pool's Gram matrix.
    Spectrum {
        config: PathBuf,
        /// Print only the largest K eigenvalues.
        #[arg(long)]
        top: Option<usize>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::Run {
            config,
            out,
            workers,
            seed_offset,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.apply_seed_offset(seed_offset);
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let result = run_sweep(&cfg, &out, workers);
            if let Ok(r) = &result {
                println!(
                    "{} runs written to {}; greedy gamma over {} steps = {:.4}",
                    r.outcomes.len(),
                    out.display(),
                    r.gamma_steps,
                    r.gamma_greedy
                );
                for s in &r.summaries {
                    println!(
                        "  {:<24} R_T mean {:.4}  avg regret at T {:.4}",
                        s.label,
                        s.regret_cum_mean,
                        s.avg_regret.last().map_or(f64::NAN, |p| p.1)
                    );
                }
            }
            result.map(|_| ())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let domain = load_domain(&cfg)?;
            let n = domain.pool.len();
            for rule in &cfg.rules {
                rule.build(n)?;
            }
            println!(
                "ok: {} arms, {} rules, {} runs of horizon {}",
                n,
                cfg.rules.len(),
                cfg.run_count(),
                cfg.horizon
            );
            Ok(())
        }
        Command::Gamma { config, steps } => {
            let cfg = load_config(&config)?;
            let domain = load_domain(&cfg)?;
            let n = domain.pool.len();
            let steps = steps.unwrap_or((cfg.horizon as usize).min(n));
            let gram = GramMatrix::new(&cfg.kernel, &domain.pool)?;
            let greedy = greedy_gamma(&gram, steps, cfg.model_noise_variance)?;
            println!("pool_size {n}");
            println!("steps {steps}");
            println!("greedy_gamma {}", greedy.gain);
            println!("greedy_indices {}", join(&greedy.indices));
            if n <= EXHAUSTIVE_MAX_POOL && steps <= EXHAUSTIVE_MAX_STEPS {
                let (best, gain) = exhaustive_gamma(&gram, steps, cfg.model_noise_variance)?;
                println!("exhaustive_gamma {gain}");
                println!("exhaustive_indices {}", join(&best));
                println!("greedy_ratio {}", greedy.gain / gain);
            }
            Ok(())
        }
        Command::Spectrum { config, top } => {
            let cfg = load_config(&config)?;
            let domain = load_domain(&cfg)?;
            let spec = GramMatrix::new(&cfg.kernel, &domain.pool)?.spectrum()?;
            println!("trace {}", spec.trace);
            println!("lambda_max {}", spec.lambda_max());
            println!("effective_rank {}", spec.effective_rank);
            match spec.decay_exponent() {
                Some(p) => println!("decay_exponent {p}"),
                None => println!("decay_exponent"),
            }
            let k = top.unwrap_or(spec.eigenvalues.len()).min(spec.eigenvalues.len());
            for (i, v) in spec.eigenvalues[..k].iter().enumerate() {
                println!("{} {v}", i + 1);
            }
            Ok(())
        }
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}
