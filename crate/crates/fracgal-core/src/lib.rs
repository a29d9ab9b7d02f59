//! Galerkin time stepping on graded temporal meshes for fractional-order
//! evolution equations.
//!
//! The library discretizes
//!
//! ```text
//!     D_t^alpha (u - u0) + A u = 0,   t in (0, T],   0 < alpha < 2, alpha != 1,
//! ```
//!
//! where `D_t^alpha` is the Riemann-Liouville fractional derivative and `A` is
//! symmetric positive definite — either a scalar rate `lambda` or the 1-D
//! Dirichlet Laplacian in a P1 finite element space.  Solutions start with a
//! weak singularity at `t = 0`, so uniform time steps lose accuracy; the mesh
//! family used throughout is the graded mesh `t_j = (j/J)^sigma * T`.
//!
//! Main pieces:
//!
//! * [`mesh`] — graded meshes, interval averages, nodal interpolants;
//! * [`ml`] — Mittag-Leffler evaluation `E_{a,b}(z)` for `z <= 0` and the
//!   closed-form mode solutions used as references;
//! * [`weights`] — the fractional kernel weight tables shared by the steppers;
//! * [`stepper`] — scalar time steppers: piecewise-constant discontinuous
//!   Galerkin (`0 < alpha < 1`) and continuous piecewise-linear
//!   Petrov-Galerkin (`1 < alpha < 2`), plus convergence studies;
//! * [`green`] — discrete fundamental (Green) vectors of the adjoint schemes
//!   and a quadrature check of the duality identity they satisfy;
//! * [`fem`] — P1 finite elements on (0,1): mass/stiffness assembly, L2
//!   projection, generalized eigendecomposition;
//! * [`pde`] — full space-time solves with direct and spectral backends and
//!   the error metrics used by the convergence experiments;
//! * [`oracles`] — randomized checks of the comparison inequalities that
//!   underpin the error analysis.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod fem;
pub mod green;
pub(crate) mod linalg;
pub(crate) mod math;
pub mod mesh;
pub mod ml;
pub mod oracles;
pub mod pde;
pub(crate) mod quad;
pub mod report;
pub mod stepper;
pub mod weights;

pub use linalg::{PencilEigen, SymTridiag};
pub use quad::QuadRule;

use core::fmt;

/// Errors reported by the numerical routines.
///
/// All constructors validate their inputs; `Error` values describe which
/// argument was rejected and what the routine required of it.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter violated its documented domain.
    Param {
        name: &'static str,
        value: f64,
        need: &'static str,
    },
    /// An index or size argument was out of range.
    Size {
        name: &'static str,
        value: usize,
        need: &'static str,
    },
    /// A coordinate fell outside the admissible closed interval.
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// Per-interval quadrature failed its self-consistency check.
    QuadratureNonConvergence { interval: usize, defect: f64 },
    /// The eigensolver failed to converge on the pair with this index.
    Eigen { index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Param { name, value, need } => {
                write!(f, "parameter `{name}` = {value} rejected: need {need}")
            }
            Error::Size { name, value, need } => {
                write!(f, "size `{name}` = {value} rejected: need {need}")
            }
            Error::Domain {
                name,
                value,
                lo,
                hi,
            } => {
                write!(f, "`{name}` = {value} outside [{lo}, {hi}]")
            }
            Error::QuadratureNonConvergence { interval, defect } => write!(
                f,
                "quadrature self-check failed on interval {interval} (defect {defect:.3e})"
            ),
            Error::Eigen { index } => write!(f, "eigensolver failed on pair {index}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
