//! Randomized Kaczmarz (RK), randomized Gauss-Seidel (RGS) and their extended
//! variants (REK, REGS) for dense real linear systems, together with the
//! expected-error bounds they obey, reproducible problem generators and a
//! multi-trial experiment harness.
//!
//! The four solvers split along two axes. RK and REK work on rows and
//! converge to the least-norm solution of underdetermined systems; plain RK
//! stalls at a noise floor on inconsistent overdetermined systems. RGS and
//! REGS work on columns and converge to the least-squares solution of
//! overdetermined systems; plain RGS drifts off the least-norm solution when
//! the system is underdetermined. The extended variants fix the failing case
//! of each family.
//!
//! ```
//! use rkgs::linalg::{DenseMatrix, LinearSystem, Regime};
//! use rkgs::sampling::Prng;
//! use rkgs::solvers::{run, SolveConfig, SolverKind};
//!
//! let x = DenseMatrix::from_rows(&[&[1.0, 1.0]]).unwrap();
//! let sys = LinearSystem::with_computed_reference(x, vec![2.0], Regime::Underdetermined).unwrap();
//! let trace = run(&sys, SolverKind::Regs, &SolveConfig::default(), &mut Prng::new(0)).unwrap();
//! assert!(trace.converged);
//! ```

pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod sampling;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
