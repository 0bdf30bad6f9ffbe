//! Multi-trial experiments and their CSV output.
//!
//! Each (solver, trial) run is seeded by `spawn_trial_rng(base_seed, trial)`
//! and runs independently, possibly on another thread. Results are collected
//! in (solver, trial) order and reduced afterwards, so output bytes do not
//! depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, LinearSystem, Regime};
use crate::problems::{gen_gaussian, load_system, GenSpec};
use crate::sampling::spawn_trial_rng;
use crate::solvers::{run_timed, ConvergenceTrace, SolveConfig, SolverKind, StopMetric};
use crate::theory::{trace_bound, RekBoundForm, TheoryBound};

pub const CSV_HEADER: &str =
    "iteration,solver,mean_err_sq,median_err_sq,min_err_sq,max_err_sq,bound_value";
pub const SOLVE_CSV_HEADER: &str = "trial,iteration,solver,error_sq,residual_sq";
pub const TIMING_CSV_HEADER: &str = "iteration,solver,mean_seconds";

/// Where an experiment's system comes from.
#[derive(Debug, Clone)]
pub enum SystemSource {
    /// A directory written by [`crate::problems::save_system`].
    Dir(PathBuf),
    /// An in-memory system.
    System(Box<LinearSystem>),
    /// A Gaussian system generated from a spec. With per-trial redraws,
    /// trial `k` uses seed `spec.seed + k`.
    Generated(GenSpec),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: SystemSource,
    pub solvers: Vec<SolverKind>,
    pub trials: u64,
    pub max_iter: u64,
    pub tol: f64,
    pub base_seed: u64,
    pub record_every: u64,
    pub redraw_matrix_per_trial: bool,
    pub stop_metric: StopMetric,
    /// Permit solver/regime pairs that do not converge to the reference
    /// (they then run to `max_iter`).
    pub allow_nonconvergent: bool,
    pub rek_form: RekBoundForm,
}

impl ExperimentConfig {
    pub fn new(source: SystemSource, solvers: Vec<SolverKind>) -> Self {
        Self {
            source,
            solvers,
            trials: 50,
            max_iter: 100_000,
            tol: 1e-6,
            base_seed: 0,
            record_every: 100,
            redraw_matrix_per_trial: false,
            stop_metric: StopMetric::ErrorToReference,
            allow_nonconvergent: false,
            rek_form: RekBoundForm::default(),
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            max_iter: self.max_iter,
            tol: self.tol,
            stop_metric: self.stop_metric,
            record_every: self.record_every,
        }
    }

    fn validate(&self, regime: Regime) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("at least one solver is required".into()));
        }
        for (k, s) in self.solvers.iter().enumerate() {
            if self.solvers[..k].contains(s) {
                return Err(Error::Config(format!("solver {s} listed twice")));
            }
        }
        if self.redraw_matrix_per_trial && !matches!(self.source, SystemSource::Generated(_)) {
            return Err(Error::Config(
                "redrawing the matrix per trial needs a generated system".into(),
            ));
        }
        self.solve_config().validate()?;
        if self.stop_metric == StopMetric::ErrorToReference && !self.allow_nonconvergent {
            if let Some(bad) = self
                .solvers
                .iter()
                .find(|&&s| !pair_has_reference(s, regime))
            {
                return Err(Error::Config(format!(
                    "{bad} has no limit at the {regime} reference; valid pairs: {}",
                    valid_pairs()
                )));
            }
        }
        Ok(())
    }
}

/// Whether `kind`'s iterates have a limit at the regime's reference. RK on
/// inconsistent systems is accepted: its error is still measured against
/// the least-squares solution, it just stalls above it.
pub fn pair_has_reference(kind: SolverKind, regime: Regime) -> bool {
    !(kind == SolverKind::Rgs && regime == Regime::Underdetermined)
}

fn valid_pairs() -> String {
    let mut out = Vec::new();
    for r in Regime::ALL {
        for s in SolverKind::ALL {
            if pair_has_reference(s, r) {
                out.push(format!("{s}/{r}"));
            }
        }
    }
    out.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub iteration: u64,
    pub solver: SolverKind,
    pub mean_err_sq: f64,
    pub median_err_sq: f64,
    pub min_err_sq: f64,
    pub max_err_sq: f64,
    pub bound_value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateTrace {
    pub rows: Vec<AggregateRow>,
}

impl AggregateTrace {
    pub fn for_solver(&self, kind: SolverKind) -> impl Iterator<Item = &AggregateRow> {
        self.rows.iter().filter(move |r| r.solver == kind)
    }

    /// Last row for `kind`, i.e. the terminal statistics over all trials.
    pub fn terminal(&self, kind: SolverKind) -> Option<&AggregateRow> {
        self.for_solver(kind).last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub iteration: u64,
    pub solver: SolverKind,
    pub mean_seconds: f64,
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub aggregate: AggregateTrace,
    pub timing: Vec<TimingRow>,
    /// Per-run traces in (solver, trial) order.
    pub traces: Vec<ConvergenceTrace>,
}

fn base_system(source: &SystemSource) -> Result<LinearSystem> {
    match source {
        SystemSource::Dir(dir) => load_system(dir),
        SystemSource::System(sys) => Ok((**sys).clone()),
        SystemSource::Generated(spec) => gen_gaussian(spec),
    }
}

struct TrialSystem {
    sys: LinearSystem,
    bound: TheoryBound,
    norm_ref_sq: f64,
}

impl TrialSystem {
    fn new(sys: LinearSystem) -> Result<Self> {
        let bound = TheoryBound::for_system(&sys)?;
        let norm_ref_sq = norm_sq(sys.reference().unwrap_or(&[]));
        Ok(Self {
            sys,
            bound,
            norm_ref_sq,
        })
    }
}

fn trial_systems(cfg: &ExperimentConfig) -> Result<Vec<TrialSystem>> {
    let first = base_system(&cfg.source)?;
    cfg.validate(first.regime())?;
    if first.reference().is_none() {
        return Err(Error::Config(format!(
            "the system has no reference solution; valid pairs: {}",
            valid_pairs()
        )));
    }
    match (&cfg.source, cfg.redraw_matrix_per_trial) {
        (SystemSource::Generated(spec), true) => (0..cfg.trials)
            .into_par_iter()
            .map(|k| {
                let spec = GenSpec {
                    seed: spec.seed.wrapping_add(k),
                    ..*spec
                };
                TrialSystem::new(gen_gaussian(&spec)?)
            })
            .collect(),
        _ => Ok(vec![TrialSystem::new(first)?]),
    }
}

/// Runs every (solver, trial) pair and aggregates the error traces.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateTrace> {
    compare_solvers(cfg).map(|e| e.aggregate)
}

/// [`run_experiment`], also keeping the raw traces and wall-clock timings.
pub fn compare_solvers(cfg: &ExperimentConfig) -> Result<Experiment> {
    let systems = trial_systems(cfg)?;
    let solve = cfg.solve_config();
    let jobs: Vec<(SolverKind, u64)> = cfg
        .solvers
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let runs: Vec<(ConvergenceTrace, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(kind, trial)| {
            let ts = &systems[trial as usize % systems.len()];
            let mut rng = spawn_trial_rng(cfg.base_seed, trial);
            let (mut trace, secs) = run_timed(&ts.sys, kind, &solve, &mut rng)?;
            trace.trial = trial;
            Ok((trace, secs))
        })
        .collect::<Result<_>>()?;

    let mut aggregate = AggregateTrace::default();
    let mut timing = Vec::new();
    let regime = systems[0].sys.regime();
    for (k, &kind) in cfg.solvers.iter().enumerate() {
        let group = &runs[k * cfg.trials as usize..(k + 1) * cfg.trials as usize];
        let end = group
            .iter()
            .map(|(t, _)| t.final_iteration)
            .max()
            .unwrap_or(0);
        for g in grid(cfg.record_every, end) {
            let mut errs: Vec<f64> = group
                .iter()
                .map(|(t, _)| value_at(t, g, |r| r.error_sq.unwrap_or(f64::NAN)))
                .collect();
            let secs = group
                .iter()
                .map(|(t, s)| value_at_index(t, g, s))
                .sum::<f64>()
                / group.len() as f64;
            let bounds: Option<Vec<f64>> = systems
                .iter()
                .map(|ts| trace_bound(&ts.bound, kind, regime, cfg.rek_form, g, ts.norm_ref_sq))
                .collect();
            let bound_value = bounds.map(|b| b.iter().sum::<f64>() / b.len() as f64);
            aggregate
                .rows
                .push(summarize(g, kind, &mut errs, bound_value));
            timing.push(TimingRow {
                iteration: g,
                solver: kind,
                mean_seconds: secs,
            });
        }
    }
    let traces = runs.into_iter().map(|(t, _)| t).collect();
    Ok(Experiment {
        aggregate,
        timing,
        traces,
    })
}

// Multiples of `every` up to `end`, then `end` itself.
fn grid(every: u64, end: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (0..=end / every).map(|k| k * every).collect();
    if *g.last().unwrap() != end {
        g.push(end);
    }
    g
}

fn record_index(trace: &ConvergenceTrace, g: u64) -> usize {
    if g >= trace.final_iteration {
        return trace.records.len() - 1;
    }
    trace
        .records
        .binary_search_by_key(&g, |r| r.iteration)
        .unwrap_or_else(|i| i.saturating_sub(1))
}

fn value_at(
    trace: &ConvergenceTrace,
    g: u64,
    f: impl Fn(&crate::solvers::TraceRecord) -> f64,
) -> f64 {
    f(&trace.records[record_index(trace, g)])
}

fn value_at_index(trace: &ConvergenceTrace, g: u64, secs: &[f64]) -> f64 {
    secs[record_index(trace, g)]
}

fn summarize(
    iteration: u64,
    solver: SolverKind,
    errs: &mut [f64],
    bound_value: Option<f64>,
) -> AggregateRow {
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    let median = if n % 2 == 1 {
        errs[n / 2]
    } else {
        0.5 * (errs[n / 2 - 1] + errs[n / 2])
    };
    let (min, max) = (errs[0], errs[n - 1]);
    let mean = (errs.iter().sum::<f64>() / n as f64).clamp(min, max);
    AggregateRow {
        iteration,
        solver,
        mean_err_sq: mean,
        median_err_sq: median,
        min_err_sq: min,
        max_err_sq: max,
        bound_value,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn aggregate_csv(trace: &AggregateTrace) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in &trace.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.solver,
            fmt(r.mean_err_sq),
            fmt(r.median_err_sq),
            fmt(r.min_err_sq),
            fmt(r.max_err_sq),
            r.bound_value.map(fmt).unwrap_or_default()
        );
    }
    s
}

pub fn emit_csv(trace: &AggregateTrace, path: &Path) -> Result<()> {
    fs::write(path, aggregate_csv(trace)).map_err(|e| Error::io(path, e))
}

/// Parses the output of [`aggregate_csv`].
pub fn parse_aggregate_csv(text: &str, path: &Path) -> Result<AggregateTrace> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(err(1, "missing or wrong header".into())),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let ln = k + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(err(ln, format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(ln, format!("bad number '{s}'")))
        };
        rows.push(AggregateRow {
            iteration: f[0]
                .parse()
                .map_err(|_| err(ln, format!("bad iteration '{}'", f[0])))?,
            solver: f[1].parse().map_err(|e: Error| err(ln, e.to_string()))?,
            mean_err_sq: num(f[2])?,
            median_err_sq: num(f[3])?,
            min_err_sq: num(f[4])?,
            max_err_sq: num(f[5])?,
            bound_value: if f[6].is_empty() {
                None
            } else {
                Some(num(f[6])?)
            },
        });
    }
    Ok(AggregateTrace { rows })
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut s = format!("{TIMING_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.iteration, r.solver, fmt(r.mean_seconds));
    }
    s
}

/// Per-iteration CSV of single runs.
pub fn solve_csv(traces: &[ConvergenceTrace]) -> String {
    let mut s = format!("{SOLVE_CSV_HEADER}\n");
    for t in traces {
        for r in &t.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                t.trial,
                r.iteration,
                t.solver,
                r.error_sq.map(fmt).unwrap_or_default(),
                fmt(r.residual_sq)
            );
        }
    }
    s
}

/// `(t, bound)` at multiples of `every` up to and including `max_iter`.
pub fn bound_series(
    sys: &LinearSystem,
    kind: SolverKind,
    rek_form: RekBoundForm,
    every: u64,
    max_iter: u64,
) -> Result<Vec<(u64, f64)>> {
    if every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    let bound = TheoryBound::for_system(sys)?;
    if bound.alpha >= 1.0 {
        return Err(Error::VacuousBound(bound.alpha));
    }
    let norm_ref_sq = norm_sq(sys.reference().unwrap_or(&[]));
    grid(every, max_iter)
        .into_iter()
        .map(|t| {
            trace_bound(&bound, kind, sys.regime(), rek_form, t, norm_ref_sq)
                .map(|b| (t, b))
                .ok_or_else(|| {
                    Error::Config(format!(
                        "no error bound for {kind} in the {} regime",
                        sys.regime()
                    ))
                })
        })
        .collect()
}

pub fn bound_csv(series: &[(u64, f64)]) -> String {
    let mut s = String::from("iteration,bound_value\n");
    for &(t, b) in series {
        let _ = writeln!(s, "{t},{}", fmt(b));
    }
    s
}
