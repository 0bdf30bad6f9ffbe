//! Closed-form expected-error bounds for the four solvers.
//!
//! All bounds share the contraction factor
//! `alpha = 1 - sigma_min^2(X) / ||X||_F^2`, where `sigma_min` is the smallest
//! nonzero singular value. Iterates start at zero, so the initial squared
//! error equals the squared norm of the reference solution.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, spectral_summary, LinearSystem, Regime, SpectralSummary};
use crate::solvers::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryBound {
    /// `1 - sigma_min^2 / ||X||_F^2`.
    pub alpha: f64,
    /// `||X beta_ref||^2 / ||X||_F^2`.
    pub b: f64,
    /// `1 + 2 kappa^2`.
    pub kappa_sq_term: f64,
    /// `||r||^2 / sigma_min^2`; zero for consistent systems.
    pub horizon: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa: f64,
}

impl TheoryBound {
    pub fn new(spectral: &SpectralSummary, b: f64, residual_norm_sq: f64) -> Self {
        let lambda = spectral.sigma_min * spectral.sigma_min;
        Self {
            alpha: 1.0 - lambda / spectral.trace_sigma,
            b,
            kappa_sq_term: 1.0 + 2.0 * spectral.kappa * spectral.kappa,
            horizon: residual_norm_sq / lambda,
            sigma_min: spectral.sigma_min,
            sigma_max: spectral.sigma_max,
            kappa: spectral.kappa,
        }
    }

    /// Bound constants of a system with a reference solution.
    pub fn for_system(sys: &LinearSystem) -> Result<Self> {
        let spectral = spectral_summary(sys.x())?;
        Self::for_system_with(sys, &spectral)
    }

    pub fn for_system_with(sys: &LinearSystem, spectral: &SpectralSummary) -> Result<Self> {
        let reference = sys
            .reference()
            .ok_or_else(|| Error::Config("bounds need a reference solution".into()))?;
        let b = norm_sq(&sys.x().matvec(reference)?) / sys.x().frob_sq();
        let r = sys.residual_ref().map_or(0.0, norm_sq);
        Ok(Self::new(spectral, b, r))
    }

    #[inline]
    fn alpha_pow(&self, t: u64) -> f64 {
        self.alpha.powf(t as f64)
    }
}

/// `alpha^t * init_err_sq`.
pub fn bound_rk_consistent(bound: &TheoryBound, t: u64, init_err_sq: f64) -> f64 {
    bound.alpha_pow(t) * init_err_sq
}

/// `alpha^t * init_err_sq + ||r||^2 / sigma_min^2`.
pub fn bound_rk_inconsistent(bound: &TheoryBound, t: u64, init_err_sq: f64) -> f64 {
    bound.alpha_pow(t) * init_err_sq + bound.horizon
}

/// REK bound in the form
/// `alpha^floor(t/2) * (1 + 2 sigma_min^2 / sigma_max^2 * ||beta_ref||^2)`.
pub fn bound_rek(bound: &TheoryBound, t: u64, norm_ref_sq: f64) -> f64 {
    let ratio = (bound.sigma_min / bound.sigma_max).powi(2);
    bound.alpha_pow(t / 2) * (1.0 + 2.0 * ratio * norm_ref_sq)
}

/// REK bound in the comparison form, evaluated at iteration `t`:
/// `alpha^floor(t/2) * (1 + 2 kappa^2) * ||beta_ref||^2`.
pub fn bound_rek_comparison(bound: &TheoryBound, t: u64, norm_ref_sq: f64) -> f64 {
    bound_comparison(bound, t / 2, norm_ref_sq)
}

/// `alpha^t * ||beta_LN||^2 + 2 alpha^floor(t/2) * B / (1 - alpha)`.
pub fn bound_regs(bound: &TheoryBound, t: u64, norm_ln_sq: f64) -> Result<f64> {
    if bound.alpha >= 1.0 {
        return Err(Error::VacuousBound(bound.alpha));
    }
    Ok(bound.alpha_pow(t) * norm_ln_sq
        + 2.0 * bound.alpha_pow(t / 2) * bound.b / (1.0 - bound.alpha))
}

/// `alpha^t * (1 + 2 kappa^2) * norm_ref_sq`, the shared REK/REGS envelope at
/// iterate `2t`.
pub fn bound_comparison(bound: &TheoryBound, t: u64, norm_ref_sq: f64) -> f64 {
    bound.alpha_pow(t) * bound.kappa_sq_term * norm_ref_sq
}

/// `L(beta) = ||y - X beta||^2 / 2`.
pub fn objective(sys: &LinearSystem, beta: &[f64]) -> Result<f64> {
    Ok(0.5 * norm_sq(&sys.residual(beta)?))
}

/// Exact one-step expectation of the RK error for a consistent system:
/// `||e||^2 - ||X e||^2 / ||X||_F^2` with `e = beta - target`.
pub fn rk_expected_error(sys: &LinearSystem, beta: &[f64], target: &[f64]) -> Result<f64> {
    let e: Vec<f64> = beta.iter().zip(target).map(|(a, b)| a - b).collect();
    let xe = sys.x().matvec(&e)?;
    Ok(norm_sq(&e) - norm_sq(&xe) / sys.x().frob_sq())
}

/// Exact one-step expectation of the RGS error in fitted-value space:
/// `||X e||^2 - ||X^T X e||^2 / ||X||_F^2`, where `target` satisfies
/// `X^T (y - X target) = 0`.
pub fn rgs_expected_fit_error(sys: &LinearSystem, beta: &[f64], target: &[f64]) -> Result<f64> {
    let e: Vec<f64> = beta.iter().zip(target).map(|(a, b)| a - b).collect();
    let xe = sys.x().matvec(&e)?;
    let xtxe = sys.x().matvec_t(&xe)?;
    Ok(norm_sq(&xe) - norm_sq(&xtxe) / sys.x().frob_sq())
}

/// Which form of the REK bound to attach to REK traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RekBoundForm {
    /// `alpha^floor(t/2) (1 + 2 sigma_min^2/sigma_max^2 ||beta||^2)`
    RateEq,
    /// `alpha^floor(t/2) (1 + 2 kappa^2) ||beta||^2`
    #[default]
    Comparison,
}

impl FromStr for RekBoundForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate-eq" => Ok(RekBoundForm::RateEq),
            "comparison" => Ok(RekBoundForm::Comparison),
            _ => Err(Error::Config(format!(
                "unknown REK bound form '{s}' (expected 'rate-eq' or 'comparison')"
            ))),
        }
    }
}

/// The bound attached to a solver's error trace in a given regime, or `None`
/// where no bound on `||beta_t - beta_ref||^2` applies (RGS on
/// underdetermined systems).
pub fn trace_bound(
    bound: &TheoryBound,
    kind: SolverKind,
    regime: Regime,
    rek_form: RekBoundForm,
    t: u64,
    norm_ref_sq: f64,
) -> Option<f64> {
    match (kind, regime) {
        (SolverKind::Regs, _) => bound_regs(bound, t, norm_ref_sq).ok(),
        (SolverKind::Rk, Regime::OverInconsistent) => {
            Some(bound_rk_inconsistent(bound, t, norm_ref_sq))
        }
        (SolverKind::Rk, _) => Some(bound_rk_consistent(bound, t, norm_ref_sq)),
        (SolverKind::Rek, _) => Some(match rek_form {
            RekBoundForm::RateEq => bound_rek(bound, t, norm_ref_sq),
            RekBoundForm::Comparison => bound_rek_comparison(bound, t, norm_ref_sq),
        }),
        (SolverKind::Rgs, Regime::Underdetermined) => None,
        (SolverKind::Rgs, _) => Some(bound_rk_consistent(bound, t, norm_ref_sq)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn bound_of(x: DenseMatrix) -> TheoryBound {
        let s = spectral_summary(&x).unwrap();
        TheoryBound::new(&s, 0.0, 0.0)
    }

    #[test]
    fn rk_consistent_examples() {
        let b = bound_of(DenseMatrix::identity(2).unwrap());
        assert_eq!(b.alpha, 0.5);
        assert_eq!(bound_rk_consistent(&b, 0, 4.0), 4.0);
        assert_eq!(bound_rk_consistent(&b, 2, 4.0), 1.0);
        let b = bound_of(DenseMatrix::diag(&[1.0, 2.0]).unwrap());
        assert!((b.alpha - 0.8).abs() < 1e-15);
        assert!((bound_rk_consistent(&b, 3, 1.0) - 0.512).abs() < 1e-14);
    }

    #[test]
    fn rk_inconsistent_examples() {
        let b = bound_of(DenseMatrix::diag(&[1.0, 2.0]).unwrap());
        assert_eq!(b.horizon, 0.0);
        for t in [0, 1, 7] {
            assert_eq!(
                bound_rk_inconsistent(&b, t, 3.0),
                bound_rk_consistent(&b, t, 3.0)
            );
        }
        let s = spectral_summary(&DenseMatrix::diag(&[1.0, 2.0]).unwrap()).unwrap();
        let b = TheoryBound::new(&s, 0.0, 0.25);
        assert_eq!(b.horizon, 0.25);
        assert_eq!(bound_rk_inconsistent(&b, 100_000, 3.0), 0.25);
    }

    #[test]
    fn rek_examples() {
        let b = bound_of(DenseMatrix::diag(&[1.0, 2.0]).unwrap());
        assert_eq!(bound_rek(&b, 0, 0.0), 1.0);
        assert_eq!(bound_rek(&b, 1, 2.0), bound_rek(&b, 0, 2.0));
        assert!((bound_rek(&b, 4, 1.0) - 0.96).abs() < 1e-14);
        // kappa = 2
        assert!((b.kappa_sq_term - 9.0).abs() < 1e-13);
        assert!((bound_rek_comparison(&b, 4, 1.0) - 0.64 * 9.0).abs() < 1e-12);
    }

    #[test]
    fn regs_examples() {
        let s = spectral_summary(&DenseMatrix::diag(&[1.0, 2.0]).unwrap()).unwrap();
        let b = TheoryBound::new(&s, 0.5, 0.0);
        let t0 = bound_regs(&b, 0, 3.0).unwrap();
        assert!((t0 - (3.0 + 2.0 * 0.5 / 0.2)).abs() < 1e-12);
        let zero = TheoryBound::new(&s, 0.0, 0.0);
        for t in [0, 1, 10, 1000] {
            assert_eq!(bound_regs(&zero, t, 0.0).unwrap(), 0.0);
        }
        let mut vacuous = b;
        vacuous.alpha = 1.0;
        assert!(matches!(
            bound_regs(&vacuous, 3, 1.0),
            Err(Error::VacuousBound(_))
        ));
    }

    #[test]
    fn comparison_examples() {
        let b = bound_of(DenseMatrix::identity(3).unwrap());
        assert_eq!(b.kappa_sq_term, 3.0);
        assert_eq!(bound_comparison(&b, 0, 2.0), 6.0);
    }

    #[test]
    fn bounds_are_non_increasing() {
        let s = spectral_summary(
            &DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.5, -1.0], &[3.0, 0.2]]).unwrap(),
        )
        .unwrap();
        let b = TheoryBound::new(&s, 0.7, 0.3);
        let evals: [&dyn Fn(u64) -> f64; 6] = [
            &|t| bound_rk_consistent(&b, t, 2.0),
            &|t| bound_rk_inconsistent(&b, t, 2.0),
            &|t| bound_rek(&b, t, 2.0),
            &|t| bound_rek_comparison(&b, t, 2.0),
            &|t| bound_regs(&b, t, 2.0).unwrap(),
            &|t| bound_comparison(&b, t, 2.0),
        ];
        for f in evals {
            for t in 0..200 {
                assert!(f(t + 1) <= f(t));
            }
        }
    }

    #[test]
    fn objective_examples() {
        let x = DenseMatrix::from_rows(&[&[1.0], &[2.0]]).unwrap();
        let sys =
            LinearSystem::new(x, vec![1.0, 1.0], Regime::OverInconsistent, None, None).unwrap();
        assert_eq!(objective(&sys, &[0.0]).unwrap(), 1.0);
        let x = DenseMatrix::identity(2).unwrap();
        let sys = LinearSystem::new(x, vec![1.0, 2.0], Regime::OverConsistent, None, None).unwrap();
        assert_eq!(objective(&sys, &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn rgs_underdetermined_has_no_bound() {
        let b = bound_of(DenseMatrix::identity(2).unwrap());
        assert!(trace_bound(
            &b,
            SolverKind::Rgs,
            Regime::Underdetermined,
            RekBoundForm::default(),
            0,
            1.0
        )
        .is_none());
        assert!(trace_bound(
            &b,
            SolverKind::Rgs,
            Regime::OverConsistent,
            RekBoundForm::default(),
            0,
            1.0
        )
        .is_some());
    }
}
