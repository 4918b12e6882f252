//! Analysis and synthesis of sampled-data controllers for linear periodic
//! jump-flow systems.
//!
//! A jump-flow system evolves through a continuous-time flow between
//! equidistant sampling instants and a discrete jump at each instant. This
//! crate certifies closed-loop dissipativity with respect to quadratic
//! supply functions (passivity and H-infinity gain as special cases) and
//! synthesizes discrete controllers that achieve it, via an exact lifting
//! of the flow into a discrete-time linear matrix inequality.
//!
//! The crate is `no_std` (with `alloc`); file formats, the command-line
//! tool, and CSV emitters live in the companion `jumpflow-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod applications;
pub mod discretize;
pub mod dissipativity;
pub mod numerics;
pub mod sdp;
pub mod simulate;
pub mod supply;
pub mod synthesis;
pub mod system;

use alloc::string::String;
use core::fmt;

/// Errors shared by every module in the crate.
///
/// Feasibility questions are answered through `Ok` values carrying
/// certificates; `Err` is reserved for violated preconditions, numerical
/// breakdown, and infeasibility verdicts that terminate a computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix argument has the wrong shape for its slot.
    Dimension {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A matrix argument contains NaN or infinite entries.
    NonFinite { context: &'static str },
    /// A matrix that must be symmetric is not, beyond tolerance.
    NotSymmetric { context: &'static str },
    /// A nominally positive semidefinite matrix has an eigenvalue below
    /// the clipping tolerance.
    EigenvalueBelowTolerance { value: f64, tol: f64 },
    /// A matrix required to be invertible is singular or nearly so.
    Singular { context: &'static str },
    /// The flow supply block M2 is not positive definite, so the lifting
    /// is undefined at this supply.
    M2NotPositiveDefinite { min_eig: f64 },
    /// The upper-left block of the lifting exponential loses invertibility
    /// somewhere on the sampling interval.
    F11NearSingular { certificate: f64, tol: f64 },
    /// The feasibility problem admits no solution with the required
    /// strictness margin. Marginal solves land here as well.
    Infeasible { margin: f64 },
    /// The interior-point backend failed to converge or the problem is
    /// unbounded.
    SolverFailure { reason: String },
    /// No finite gain could be certified below the search ceiling; the
    /// system is not (verifiably) globally exponentially stable.
    NotGes { gamma_max: f64, spectral_radius: f64 },
    /// Controller reconstruction was rejected because the coupling factor
    /// is too ill-conditioned to invert reliably.
    IllConditioned { context: &'static str, cond: f64 },
    /// An argument violates a documented precondition.
    InvalidArgument { context: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                context,
                expected,
                got,
            } => write!(
                f,
                "{context}: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::NonFinite { context } => write!(f, "{context}: non-finite entries"),
            Error::NotSymmetric { context } => write!(f, "{context}: matrix is not symmetric"),
            Error::EigenvalueBelowTolerance { value, tol } => write!(
                f,
                "eigenvalue {value:.3e} below positive semidefiniteness tolerance -{tol:.3e}"
            ),
            Error::Singular { context } => write!(f, "{context}: singular matrix"),
            Error::M2NotPositiveDefinite { min_eig } => write!(
                f,
                "flow supply block M2 not positive definite (min eigenvalue {min_eig:.3e})"
            ),
            Error::F11NearSingular { certificate, tol } => write!(
                f,
                "lifting block F11 near-singular on the interval \
                 (min singular value {certificate:.3e} < {tol:.3e})"
            ),
            Error::Infeasible { margin } => {
                write!(f, "LMI infeasible (achieved margin {margin:.3e})")
            }
            Error::SolverFailure { reason } => write!(f, "solver failure: {reason}"),
            Error::NotGes {
                gamma_max,
                spectral_radius,
            } => write!(
                f,
                "no gain certified below {gamma_max:.3e}; monodromy spectral radius {spectral_radius:.6}"
            ),
            Error::IllConditioned { context, cond } => {
                write!(f, "{context}: condition number {cond:.3e} too large")
            }
            Error::InvalidArgument { context } => write!(f, "invalid argument: {context}"),
        }
    }
}

pub use numerics::Matrix;
