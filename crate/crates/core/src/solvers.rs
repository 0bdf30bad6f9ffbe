//! The four randomized kernels as single-step transitions on a
//! [`SolverState`], and the iteration driver [`run`].
//!
//! Each kernel has an index-explicit form ([`rk_step`], [`rgs_step`],
//! [`rek_step`], [`regs_step`]) that performs the update for given row/column
//! choices, and a sampling form ([`Stepper::step`]) that draws those choices
//! from the squared-norm distributions first. One combined update of REK or
//! REGS (one row and one column) counts as one iteration.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dist_sq, dot, norm_sq, project_out_row, LinearSystem, Regime};
use crate::sampling::{col_distribution, row_distribution, Prng, WeightedIndex};

/// The maintained residual is recomputed from scratch this often.
pub const RESIDUAL_REFRESH_EVERY: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// Randomized Kaczmarz.
    Rk,
    /// Randomized Gauss-Seidel (coordinate descent).
    Rgs,
    /// Randomized Extended Kaczmarz.
    Rek,
    /// Randomized Extended Gauss-Seidel.
    Regs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Rk,
        SolverKind::Rgs,
        SolverKind::Rek,
        SolverKind::Regs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Rk => "RK",
            SolverKind::Rgs => "RGS",
            SolverKind::Rek => "REK",
            SolverKind::Regs => "REGS",
        }
    }

    /// Whether the method converges to the regime's reference solution.
    pub fn converges_in(self, regime: Regime) -> bool {
        !matches!(
            (self, regime),
            (SolverKind::Rk, Regime::OverInconsistent) | (SolverKind::Rgs, Regime::Underdetermined)
        )
    }

    // RGS and REGS keep `y - X beta` up to date at O(m) per step.
    fn maintains_residual(self) -> bool {
        matches!(self, SolverKind::Rgs | SolverKind::Regs)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown solver '{s}'")))
    }
}

/// Iterate of one solver run.
///
/// `z` is the auxiliary sequence of the extended methods: for REK it lives in
/// `R^m` and tracks the part of `y` outside the range of `X`; for REGS it
/// lives in `R^n` and tracks the part of `beta` outside the row span. REGS
/// reports `beta - z` as its estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    kind: SolverKind,
    pub beta: Vec<f64>,
    pub z: Option<Vec<f64>>,
    residual: Vec<f64>,
    residual_stale: bool,
    since_refresh: u64,
    pub iteration: u64,
}

impl SolverState {
    /// `beta_0 = 0`; `z_0 = y` for REK and `z_0 = 0` for REGS.
    pub fn initial(sys: &LinearSystem, kind: SolverKind) -> Self {
        let z = match kind {
            SolverKind::Rek => Some(sys.y().to_vec()),
            SolverKind::Regs => Some(vec![0.0; sys.cols()]),
            _ => None,
        };
        Self {
            kind,
            beta: vec![0.0; sys.cols()],
            z,
            residual: sys.y().to_vec(),
            residual_stale: false,
            since_refresh: 0,
            iteration: 0,
        }
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    /// The solver's reported estimate: `beta - z` for REGS, `beta` otherwise.
    pub fn estimate(&self) -> Vec<f64> {
        match (&self.z, self.kind) {
            (Some(z), SolverKind::Regs) => self.beta.iter().zip(z).map(|(b, z)| b - z).collect(),
            _ => self.beta.clone(),
        }
    }

    /// `||estimate - reference||^2` without allocating.
    pub fn error_sq(&self, reference: &[f64]) -> f64 {
        match (&self.z, self.kind) {
            (Some(z), SolverKind::Regs) => self
                .beta
                .iter()
                .zip(z)
                .zip(reference)
                .map(|((b, z), r)| {
                    let d = b - z - r;
                    d * d
                })
                .sum(),
            _ => dist_sq(&self.beta, reference),
        }
    }

    /// `y - X beta`, recomputed first if a row-action step left it stale.
    pub fn residual(&mut self, sys: &LinearSystem) -> &[f64] {
        if self.residual_stale {
            self.refresh_residual(sys);
        }
        &self.residual
    }

    pub fn residual_sq(&mut self, sys: &LinearSystem) -> f64 {
        norm_sq(self.residual(sys))
    }

    pub fn refresh_residual(&mut self, sys: &LinearSystem) {
        let x = sys.x();
        for (i, r) in self.residual.iter_mut().enumerate() {
            *r = sys.y()[i] - dot(x.row(i), &self.beta);
        }
        self.residual_stale = false;
        self.since_refresh = 0;
    }

    // Bookkeeping shared by the column-action updates.
    fn column_update(&mut self, sys: &LinearSystem, j: usize) -> f64 {
        if self.residual_stale || self.since_refresh >= RESIDUAL_REFRESH_EVERY {
            self.refresh_residual(sys);
        }
        let col = sys.x().col(j);
        let norm = sys.x().col_norms_sq()[j];
        let step = dot(col, &self.residual) / norm;
        self.beta[j] += step;
        axpy(-step, col, &mut self.residual);
        self.since_refresh += 1;
        step
    }
}

/// RK update for row `i`:
/// `beta += (y^i - X^i beta) / ||X^i||^2 * (X^i)^T`.
pub fn rk_step(sys: &LinearSystem, state: &mut SolverState, i: usize) {
    let x = sys.x();
    let step = sys.row_residual(i, &state.beta) / x.row_norms_sq()[i];
    axpy(step, x.row(i), &mut state.beta);
    state.residual_stale = true;
    state.iteration += 1;
}

/// RGS update for column `j`:
/// `beta_j += X_(j)^T (y - X beta) / ||X_(j)||^2`, residual updated in O(m).
pub fn rgs_step(sys: &LinearSystem, state: &mut SolverState, j: usize) {
    state.column_update(sys, j);
    state.iteration += 1;
}

/// REK update for row `i` and column `j`:
/// `beta += (y^i - z^i - X^i beta) / ||X^i||^2 * (X^i)^T` using the current
/// `z`, then `z -= <X_(j), z> / ||X_(j)||^2 * X_(j)`.
pub fn rek_step(sys: &LinearSystem, state: &mut SolverState, i: usize, j: usize) {
    let x = sys.x();
    let z = state.z.as_mut().expect("REK state carries z");
    let step = (sys.row_residual(i, &state.beta) - z[i]) / x.row_norms_sq()[i];
    axpy(step, x.row(i), &mut state.beta);
    let col = x.col(j);
    let zstep = dot(col, z) / x.col_norms_sq()[j];
    axpy(-zstep, col, z);
    state.residual_stale = true;
    state.iteration += 1;
}

/// REGS update for column `j` and row `i`: the RGS step
/// `gamma = X_(j)^T (y - X beta) / ||X_(j)||^2 e_j`, `beta += gamma`, then
/// `z = P_i (z + gamma)`.
pub fn regs_step(sys: &LinearSystem, state: &mut SolverState, j: usize, i: usize) {
    let gamma = state.column_update(sys, j);
    let z = state.z.as_mut().expect("REGS state carries z");
    z[j] += gamma;
    project_out_row(sys.x(), i, z).expect("sampled rows have nonzero norm");
    state.iteration += 1;
}

/// Row/column choices made by one sampled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Draw {
    pub row: Option<usize>,
    pub col: Option<usize>,
}

/// A solver bound to one system, with its sampling distributions built once.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    sys: &'a LinearSystem,
    kind: SolverKind,
    rows: WeightedIndex,
    cols: WeightedIndex,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a LinearSystem, kind: SolverKind) -> Result<Self> {
        Ok(Self {
            sys,
            kind,
            rows: row_distribution(sys.x())?,
            cols: col_distribution(sys.x())?,
        })
    }

    pub fn system(&self) -> &'a LinearSystem {
        self.sys
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    pub fn init_state(&self) -> SolverState {
        SolverState::initial(self.sys, self.kind)
    }

    /// Draws the step's row and/or column and applies the update. REK draws
    /// the row first; REGS draws the column first.
    pub fn step(&self, state: &mut SolverState, rng: &mut Prng) -> Draw {
        match self.kind {
            SolverKind::Rk => {
                let i = self.rows.sample(rng);
                rk_step(self.sys, state, i);
                Draw {
                    row: Some(i),
                    col: None,
                }
            }
            SolverKind::Rgs => {
                let j = self.cols.sample(rng);
                rgs_step(self.sys, state, j);
                Draw {
                    row: None,
                    col: Some(j),
                }
            }
            SolverKind::Rek => {
                let i = self.rows.sample(rng);
                let j = self.cols.sample(rng);
                rek_step(self.sys, state, i, j);
                Draw {
                    row: Some(i),
                    col: Some(j),
                }
            }
            SolverKind::Regs => {
                let j = self.cols.sample(rng);
                let i = self.rows.sample(rng);
                regs_step(self.sys, state, j, i);
                Draw {
                    row: Some(i),
                    col: Some(j),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMetric {
    /// `||estimate - reference||^2 < tol`, checked every iteration.
    ErrorToReference,
    /// `||y - X beta||^2 < tol`. Checked every iteration for RGS/REGS, which
    /// maintain the residual, and at record points for RK/REK.
    ResidualNorm,
}

impl FromStr for StopMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(StopMetric::ErrorToReference),
            "residual" => Ok(StopMetric::ResidualNorm),
            _ => Err(Error::Config(format!(
                "unknown stop metric '{s}' (expected 'error' or 'residual')"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub max_iter: u64,
    pub tol: f64,
    pub stop_metric: StopMetric,
    pub record_every: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-6,
            stop_metric: StopMetric::ErrorToReference,
            record_every: 1,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    /// `||estimate - reference||^2`, absent when the system has no reference.
    pub error_sq: Option<f64>,
    pub residual_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub solver: SolverKind,
    pub trial: u64,
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub final_iteration: u64,
}

impl ConvergenceTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }
}

/// Runs one solver from `beta_0 = 0` until the stop metric drops below `tol`
/// or `max_iter` steps have been taken.
pub fn run(
    sys: &LinearSystem,
    kind: SolverKind,
    cfg: &SolveConfig,
    rng: &mut Prng,
) -> Result<ConvergenceTrace> {
    run_timed(sys, kind, cfg, rng).map(|(trace, _)| trace)
}

/// [`run`], also returning the wall-clock seconds elapsed at each record.
pub fn run_timed(
    sys: &LinearSystem,
    kind: SolverKind,
    cfg: &SolveConfig,
    rng: &mut Prng,
) -> Result<(ConvergenceTrace, Vec<f64>)> {
    cfg.validate()?;
    let reference = sys.reference();
    if cfg.stop_metric == StopMetric::ErrorToReference && reference.is_none() {
        return Err(Error::Config(
            "stopping on error to reference requires a reference solution".into(),
        ));
    }
    let stepper = Stepper::new(sys, kind)?;
    let mut state = stepper.init_state();
    let start = Instant::now();
    let mut records = Vec::new();
    let mut seconds = Vec::new();

    let mut record = |state: &mut SolverState, records: &mut Vec<TraceRecord>| {
        records.push(TraceRecord {
            iteration: state.iteration,
            error_sq: reference.map(|r| state.error_sq(r)),
            residual_sq: state.residual_sq(sys),
        });
        seconds.push(start.elapsed().as_secs_f64());
    };

    let metric_every_step =
        cfg.stop_metric == StopMetric::ErrorToReference || kind.maintains_residual();
    let metric = |state: &mut SolverState| match cfg.stop_metric {
        StopMetric::ErrorToReference => state.error_sq(reference.unwrap()),
        StopMetric::ResidualNorm => state.residual_sq(sys),
    };

    record(&mut state, &mut records);
    let mut converged = metric(&mut state) < cfg.tol;
    while !converged && state.iteration < cfg.max_iter {
        stepper.step(&mut state, rng);
        let t = state.iteration;
        let on_grid = t % cfg.record_every == 0;
        if metric_every_step || on_grid {
            converged = metric(&mut state) < cfg.tol;
        }
        if on_grid || converged || t == cfg.max_iter {
            record(&mut state, &mut records);
        }
    }
    let trace = ConvergenceTrace {
        solver: kind,
        trial: 0,
        records,
        converged,
        final_iteration: state.iteration,
    };
    Ok((trace, seconds))
}
