//! Direct reference solutions built on the Gram matrices `X^T X` and `X X^T`.
//!
//! These are the oracles the iterative solvers are validated against: a
//! symmetric positive-definite Cholesky solve for the least-squares and
//! least-norm solutions, and a cyclic Jacobi eigenvalue sweep for the extreme
//! singular values.

use super::dense::{axpy, check_len, dot, DenseMatrix};
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Jacobi stops once the off-diagonal norm drops below this fraction of the
/// Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-14;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Extreme singular values of `X` and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    /// Smallest nonzero singular value.
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `sigma_max / sigma_min`.
    pub kappa: f64,
    /// Smallest positive eigenvalue of the Gram matrix, `sigma_min^2`.
    pub lambda_min: f64,
    /// Trace of the Gram matrix, equal to `||X||_F^2`.
    pub trace_sigma: f64,
    /// Number of eigenvalues above the rank threshold.
    pub rank: usize,
}

/// Eigenvalues of a symmetric `n x n` matrix (row-major) by cyclic Jacobi
/// rotations, returned in ascending order.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    check_len(n * n, a.len())?;
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= JACOBI_TOL * frob {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q] * a[p * n + q];
            }
        }
    }
    s.sqrt()
}

// One Jacobi rotation zeroing a[p][q].
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[k * n + p] = new_p;
        a[p * n + k] = new_p;
        a[k * n + q] = new_q;
        a[q * n + k] = new_q;
    }
}

/// Extreme singular values of `X` from the eigenvalues of its smaller Gram
/// matrix.
pub fn spectral_summary(x: &DenseMatrix) -> Result<SpectralSummary> {
    let (g, k) = x.small_gram();
    let eig = symmetric_eigenvalues(g, k)?;
    let lambda_max = *eig.last().unwrap_or(&0.0);
    if lambda_max <= 0.0 {
        return Err(Error::InvalidSystem("matrix is identically zero".into()));
    }
    let cutoff = RANK_THRESHOLD * lambda_max;
    let kept: Vec<f64> = eig.into_iter().filter(|&l| l > cutoff).collect();
    let lambda_min = kept[0];
    let sigma_min = lambda_min.sqrt();
    let sigma_max = lambda_max.sqrt();
    Ok(SpectralSummary {
        sigma_min,
        sigma_max,
        kappa: sigma_max / sigma_min,
        lambda_min,
        trace_sigma: x.frob_sq(),
        rank: kept.len(),
    })
}

/// Cholesky factor `L` of a symmetric positive-definite matrix, `A = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        check_len(n * n, a.len())?;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Singular {
                    ratio: d / a[j * n + j].abs().max(f64::MIN_POSITIVE),
                    threshold: RANK_THRESHOLD,
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &z[..i]);
            z[i] = (z[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        z
    }
}

// Rank test on a Gram matrix followed by its Cholesky factorization.
fn factor_full_rank(g: Vec<f64>, n: usize) -> Result<Cholesky> {
    let chol = Cholesky::factor(&g, n);
    let eig = symmetric_eigenvalues(g, n)?;
    let (lo, hi) = (eig[0], eig[n - 1]);
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if ratio <= RANK_THRESHOLD {
        return Err(Error::Singular {
            ratio,
            threshold: RANK_THRESHOLD,
        });
    }
    chol
}

/// Least-squares solution `(X^T X)^{-1} X^T y` for a full column rank `X`
/// with `m >= n`. One step of iterative refinement is applied.
pub fn least_squares_ref(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_len(x.rows(), y.len())?;
    if x.rows() < x.cols() {
        return Err(Error::InvalidSystem(format!(
            "least-squares reference needs m >= n, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let chol = factor_full_rank(x.gram_cols(), x.cols())?;
    let mut beta = chol.solve(&x.matvec_t(y)?);
    let fit = x.matvec(&beta)?;
    let r: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    let delta = chol.solve(&x.matvec_t(&r)?);
    axpy(1.0, &delta, &mut beta);
    Ok(beta)
}

/// Factored `X X^T` for a full row rank `X`: solves least-norm problems and
/// projects onto the row span of `X`.
#[derive(Debug, Clone)]
pub struct RowSpanProjector<'a> {
    x: &'a DenseMatrix,
    chol: Cholesky,
}

impl<'a> RowSpanProjector<'a> {
    pub fn new(x: &'a DenseMatrix) -> Result<Self> {
        if x.rows() > x.cols() {
            return Err(Error::InvalidSystem(format!(
                "least-norm reference needs m <= n, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let chol = factor_full_rank(x.gram_rows(), x.rows())?;
        Ok(Self { x, chol })
    }

    /// Minimum-norm solution of `X beta = y`: `X^T (X X^T)^{-1} y`, with one
    /// refinement step.
    pub fn least_norm(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.x.rows(), y.len())?;
        let mut beta = self.x.matvec_t(&self.chol.solve(y))?;
        let fit = self.x.matvec(&beta)?;
        let r: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        let delta = self.x.matvec_t(&self.chol.solve(&r))?;
        axpy(1.0, &delta, &mut beta);
        Ok(beta)
    }

    /// Orthogonal projection of `v` onto the row span of `X`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.least_norm(&self.x.matvec(v)?)
    }
}

/// Least-norm solution `X^T (X X^T)^{-1} y` for a full row rank `X` with
/// `m <= n`.
pub fn least_norm_ref(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    RowSpanProjector::new(x)?.least_norm(y)
}
