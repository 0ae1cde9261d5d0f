//! Lifted semidefinite relaxations for rank-constrained quadratic matrix
//! problems.
//!
//! The crate builds relaxations of
//!
//! ```text
//!   min  lambda rank(X) + <H, v v^T> + <D, X> + c   s.t. rank(X) <= k, ...
//! ```
//!
//! as [`conic::ConicProgram`]s, solves them with a first-order splitting
//! solver, and provides matrix-completion, reduced-rank regression and
//! basis-pursuit specializations together with an alternating-minimization
//! upper bound and experiment drivers.

pub mod bench;
pub mod conic;
pub mod error;
pub mod heuristics;
pub mod linalg;
pub mod library;
pub mod problem;
pub mod relax;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
