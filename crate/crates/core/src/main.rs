use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rkgs::harness::{
    aggregate_csv, bound_csv, bound_series, compare_solvers, solve_csv, timing_csv,
    ExperimentConfig, SystemSource,
};
use rkgs::linalg::Regime;
use rkgs::problems::{gen_gaussian, gen_tomography, load_system, save_system, GenSpec, TomoSpec};
use rkgs::sampling::spawn_trial_rng;
use rkgs::solvers::{run, SolveConfig, SolverKind, StopMetric};
use rkgs::theory::RekBoundForm;
use rkgs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rkgs",
    version,
    about = "Randomized Kaczmarz / Gauss-Seidel solvers and experiments"
)]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stopping tolerance on the squared error (or residual).
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 100_000)]
    max_iter: u64,
    #[arg(long, global = true, default_value_t = 50)]
    trials: u64,
    /// Record stride; defaults to 1 for `solve` and 100 otherwise.
    #[arg(long, global = true)]
    record_every: Option<u64>,
    /// Output directory (`gen`, `tomo`) or CSV file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a standard-Gaussian system directory.
    Gen(GenArgs),
    /// Generate a tomography-style underdetermined system directory.
    Tomo {
        #[arg(long)]
        grid_n: usize,
        #[arg(long, default_value_t = 3)]
        oversample: usize,
    },
    /// Run one trial of one solver and print its per-iteration trace.
    Solve {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        solver: SolverKind,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, default_value = "error")]
        stop: StopMetric,
    },
    /// Run several solvers over many trials and print aggregate traces.
    Compare(CompareArgs),
    /// Print a solver's error bound on a system.
    Bounds {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        solver: SolverKind,
        #[arg(long, default_value = "comparison")]
        rek_form: RekBoundForm,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    regime: Regime,
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// System directory; otherwise a Gaussian system is generated.
    #[arg(long, conflicts_with_all = ["m", "n", "regime"])]
    system: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    regime: Option<Regime>,
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    /// Comma-separated solvers; defaults to all with a limit at the reference.
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<SolverKind>,
    /// Draw a new matrix for every trial (generated systems only).
    #[arg(long)]
    redraw: bool,
    #[arg(long, default_value = "error")]
    stop: StopMetric,
    /// Allow solver/regime pairs with no limit at the reference.
    #[arg(long)]
    allow_nonconvergent: bool,
    #[arg(long, default_value = "comparison")]
    rek_form: RekBoundForm,
    /// Write wall-clock seconds per recorded block to this CSV.
    #[arg(long)]
    timing_out: Option<PathBuf>,
    /// Worker threads for concurrent trials (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn require_out(out: Option<&Path>) -> Result<&Path> {
    out.ok_or_else(|| Error::Config("--out <DIR> is required".into()))
}

fn execute(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen(a) => {
            let spec = GenSpec {
                m: a.m,
                n: a.n,
                regime: a.regime,
                seed: cli.seed,
                noise_scale: a.noise_scale,
            };
            save_system(&gen_gaussian(&spec)?, require_out(out)?)
        }
        Command::Tomo { grid_n, oversample } => {
            let spec = TomoSpec {
                grid_n,
                oversample,
                seed: cli.seed,
            };
            save_system(&gen_tomography(&spec)?, require_out(out)?)
        }
        Command::Solve {
            system,
            solver,
            trial,
            stop,
        } => {
            let sys = load_system(&system)?;
            let cfg = SolveConfig {
                max_iter: cli.max_iter,
                tol: cli.tol,
                stop_metric: stop,
                record_every: cli.record_every.unwrap_or(1),
            };
            let mut trace = run(&sys, solver, &cfg, &mut spawn_trial_rng(cli.seed, trial))?;
            trace.trial = trial;
            write_out(out, &solve_csv(&[trace]))
        }
        Command::Compare(a) => {
            let source = match (a.system, a.m, a.n, a.regime) {
                (Some(dir), ..) => SystemSource::Dir(dir),
                (None, Some(m), Some(n), Some(regime)) => SystemSource::Generated(GenSpec {
                    m,
                    n,
                    regime,
                    seed: cli.seed,
                    noise_scale: a.noise_scale,
                }),
                _ => {
                    return Err(Error::Config(
                        "compare needs --system DIR or all of --m, --n, --regime".into(),
                    ))
                }
            };
            let solvers = if a.solvers.is_empty() {
                let regime = match &source {
                    SystemSource::Dir(d) => load_system(d)?.regime(),
                    SystemSource::Generated(g) => g.regime,
                    SystemSource::System(s) => s.regime(),
                };
                SolverKind::ALL
                    .into_iter()
                    .filter(|&s| rkgs::harness::pair_has_reference(s, regime))
                    .collect()
            } else {
                a.solvers
            };
            let cfg = ExperimentConfig {
                source,
                solvers,
                trials: cli.trials,
                max_iter: cli.max_iter,
                tol: cli.tol,
                base_seed: cli.seed,
                record_every: cli.record_every.unwrap_or(100),
                redraw_matrix_per_trial: a.redraw,
                stop_metric: a.stop,
                allow_nonconvergent: a.allow_nonconvergent,
                rek_form: a.rek_form,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(a.threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            let exp = pool.install(|| compare_solvers(&cfg))?;
            if let Some(p) = &a.timing_out {
                write_out(Some(p), &timing_csv(&exp.timing))?;
            }
            write_out(out, &aggregate_csv(&exp.aggregate))
        }
        Command::Bounds {
            system,
            solver,
            rek_form,
        } => {
            let sys = load_system(&system)?;
            let every = cli.record_every.unwrap_or(100);
            let series = bound_series(&sys, solver, rek_form, every, cli.max_iter)?;
            write_out(out, &bound_csv(&series))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
