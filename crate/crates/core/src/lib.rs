//! Common-descent method for nonsmooth multiobjective optimization in
//! (finite-dimensional models of) Hilbert spaces.
//!
//! The pipeline is:
//!
//! * [`space`]: inner product, dual pairing and Riesz map of the space.
//! * [`minnorm`]: minimum-norm element of the convex hull of sampled
//!   subderivatives.
//! * [`sampling`]: bisection search for a new subderivative that improves
//!   the current hull.
//! * [`direction`]: enrich the sampled hull until the min-norm direction is
//!   either small or yields sufficient decrease for every objective.
//! * [`solver`]: the outer descent loop with Armijo backtracking and
//!   `(ε, δ)`-criticality stopping.
//!
//! Test problems live in [`analytic`] (closed-form nonsmooth problems) and
//! [`fem`] (a bicriteria optimal control problem for the obstacle problem
//! discretized with P1 finite elements).

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod direction;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod minnorm;
pub mod problem;
pub mod sampling;
pub mod solver;
pub mod space;

pub use direction::{compute_descent_direction, DirectionParams, DirectionResult, DirectionStatus};
pub use error::{Error, Result};
pub use minnorm::{min_norm_point, MinNormResult};
pub use problem::{EvalCounts, MultiObjective};
pub use sampling::{find_new_subderivative, SamplingOutcome, SamplingParams};
pub use solver::{armijo_step, solve, RunRecord, RunStatus, Schedule, SolverConfig, TraceRow};
pub use space::{Dual, InnerProductSpace, Primal};
