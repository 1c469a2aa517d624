//! Frank-Wolfe with uniform affine approximations (FWUA).
//!
//! Minimizes separable nonsmooth convex objectives over the trace-norm ball
//! `{X : ||X||_tr <= delta}`. Each iteration replaces the usual gradient
//! linearization by the entrywise Chebyshev (minimax) affine approximation of
//! the objective on an infinity-norm neighborhood whose radius tracks the
//! Frank-Wolfe step sizes.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, data
//! generation and the command line live in the `fwua-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod error;
pub mod lmo;
pub mod matrix;
pub mod metrics;
pub mod objective;
pub mod solver;

pub use approx::{AffineLine, ChebyshevFit, ComponentFunction, UniformAffine};
pub use error::{Error, Result};
pub use lmo::{Atom, LinearOperator, LmoOptions, LmoOutput};
pub use matrix::Matrix;
pub use objective::{ObjectiveMeta, SeparableObjective};
pub use solver::{ConvergenceRecord, SolveOutput, SolverConfig, SolverState, Variant};
