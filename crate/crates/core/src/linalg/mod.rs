//! Dense matrices, linear systems and the direct reference oracles the
//! iterative solvers are checked against.

mod dense;
mod gram;
pub mod io;
mod system;

pub use dense::{
    apply_row_projector, axpy, dist_sq, dot, matvec, norm_sq, project_out_row, sub, DenseMatrix,
};
pub use gram::{
    least_norm_ref, least_squares_ref, spectral_summary, symmetric_eigenvalues, Cholesky,
    RowSpanProjector, SpectralSummary, JACOBI_MAX_SWEEPS, JACOBI_TOL, RANK_THRESHOLD,
};
pub use system::{LinearSystem, Regime, SYSTEM_CHECK_TOL};
