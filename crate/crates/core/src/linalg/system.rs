use std::fmt;
use std::str::FromStr;

use super::dense::{dot, norm_sq, sub, DenseMatrix};
use super::gram::{least_norm_ref, least_squares_ref};
use crate::error::{Error, Result};

/// The three system settings the solvers are compared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `m >= n`, `y` in the range of `X`; reference is the unique solution.
    OverConsistent,
    /// `m > n`, `y = X beta_LS + r` with `X^T r = 0`; reference is `beta_LS`.
    OverInconsistent,
    /// `m < n`, consistent; reference is the least-norm solution.
    Underdetermined,
}

impl Regime {
    pub const ALL: [Regime; 3] = [
        Regime::OverConsistent,
        Regime::OverInconsistent,
        Regime::Underdetermined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::OverConsistent => "over-consistent",
            Regime::OverInconsistent => "over-inconsistent",
            Regime::Underdetermined => "underdetermined",
        }
    }

    pub fn is_consistent(self) -> bool {
        !matches!(self, Regime::OverInconsistent)
    }

    /// Whether an `m x n` matrix is admissible for this regime.
    pub fn admits(self, m: usize, n: usize) -> bool {
        match self {
            Regime::OverConsistent => m >= n,
            Regime::OverInconsistent => m > n,
            Regime::Underdetermined => m < n,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown regime '{s}'")))
    }
}

/// Relative tolerance used by the construction-time invariant checks.
pub const SYSTEM_CHECK_TOL: f64 = 1e-8;

/// A linear system `X beta = y` with its regime and optional reference
/// solution and least-squares residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    x: DenseMatrix,
    y: Vec<f64>,
    regime: Regime,
    reference: Option<Vec<f64>>,
    residual_ref: Option<Vec<f64>>,
    seed: Option<u64>,
}

impl LinearSystem {
    /// Builds a system and checks its invariants: dimensions, regime shape,
    /// `X^T r = 0` for inconsistent systems and `X ref = y` for consistent ones.
    pub fn new(
        x: DenseMatrix,
        y: Vec<f64>,
        regime: Regime,
        reference: Option<Vec<f64>>,
        residual_ref: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (m, n) = (x.rows(), x.cols());
        if y.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: y.len(),
            });
        }
        if !regime.admits(m, n) {
            return Err(Error::InvalidSystem(format!(
                "{m}x{n} matrix is not admissible for regime {regime}"
            )));
        }
        if let Some(r) = &reference {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        if let Some(r) = &residual_ref {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: r.len(),
                });
            }
        }
        let sys = Self {
            x,
            y,
            regime,
            reference,
            residual_ref,
            seed: None,
        };
        sys.check_invariants()?;
        Ok(sys)
    }

    fn check_invariants(&self) -> Result<()> {
        if let (Regime::OverInconsistent, Some(r)) = (self.regime, &self.residual_ref) {
            let xtr = self.x.matvec_t(r)?;
            let lhs = norm_sq(&xtr).sqrt();
            let rhs = SYSTEM_CHECK_TOL * self.x.frob_sq().sqrt() * norm_sq(r).sqrt();
            if lhs > rhs {
                return Err(Error::InvalidSystem(format!(
                    "residual is not orthogonal to the columns: ||X^T r|| = {lhs:e}"
                )));
            }
        }
        if let (true, Some(b)) = (self.regime.is_consistent(), &self.reference) {
            let fit = self.x.matvec(b)?;
            let lhs = norm_sq(&sub(&fit, &self.y)).sqrt();
            let rhs = SYSTEM_CHECK_TOL * norm_sq(&self.y).sqrt();
            if lhs > rhs {
                return Err(Error::InvalidSystem(format!(
                    "reference does not solve the system: ||X ref - y|| = {lhs:e}"
                )));
            }
        }
        Ok(())
    }

    /// Builds a system whose reference (and, if inconsistent, residual) is
    /// computed by the direct oracles.
    pub fn with_computed_reference(x: DenseMatrix, y: Vec<f64>, regime: Regime) -> Result<Self> {
        match regime {
            Regime::Underdetermined => {
                let r = least_norm_ref(&x, &y)?;
                Self::new(x, y, regime, Some(r), None)
            }
            Regime::OverConsistent => {
                let r = least_squares_ref(&x, &y)?;
                Self::new(x, y, regime, Some(r), None)
            }
            Regime::OverInconsistent => {
                let r = least_squares_ref(&x, &y)?;
                let fit = x.matvec(&r)?;
                let res = sub(&y, &fit);
                Self::new(x, y, regime, Some(r), Some(res))
            }
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn reference(&self) -> Option<&[f64]> {
        self.reference.as_deref()
    }

    pub fn residual_ref(&self) -> Option<&[f64]> {
        self.residual_ref.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }

    /// Residual `y - X beta`.
    pub fn residual(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let fit = self.x.matvec(beta)?;
        Ok(sub(&self.y, &fit))
    }

    /// `y^i - X^i beta` for a single row.
    #[inline]
    pub fn row_residual(&self, i: usize, beta: &[f64]) -> f64 {
        self.y[i] - dot(self.x.row(i), beta)
    }
}
