//! Projected subgradient method for nonsmooth convex minimization over compact
//! convex sets, with a weighted ergodic averaging family and exact evaluators
//! for the closed-form convergence rates the averages are certified against.
//!
//! The solver iterates `y_{t+1} = x_t - eta_t * g_t` followed by a Euclidean
//! projection back onto the feasible set, where `g_t` is a subgradient of the
//! objective at `x_t`. Candidate points are weighted averages of the iterates
//! with weights `eta_s^(-k)` for a configurable exponent `k >= -1`; `k = 0` is
//! the plain arithmetic mean, `k = -1` weights by the step sizes themselves,
//! and `k > 0` emphasizes recent iterates. Every run can annotate its trace
//! with the matching rate bound and check the bound pointwise.
//!
//! ```
//! use psg_core::{make_l1_distance, run, RunOptions, StepSchedule, StridePolicy, Vector};
//!
//! let problem = make_l1_distance(4, &Vector::zeros(4), -1.0, 1.0)?;
//! let schedule = StepSchedule::sqrt_decay(problem.radius, problem.lipschitz)?;
//! let options = RunOptions {
//!     start: Some(Vector::from_element(4, 1.0)),
//!     stride: StridePolicy::Full,
//!     ..RunOptions::default()
//! };
//! let trace = run(&problem, &schedule, &[0.0, 1.0], 500, &options)?;
//!
//! // the averaged-iterate gap sits below its certificate at every row
//! for row in &trace.rows {
//!     assert!(row.gap_avg[0] <= row.bound[0]);
//! }
//! # Ok::<(), psg_core::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod kahan;
pub mod problems;
pub mod projections;
pub mod schedules;
pub mod solver;

/// Dense column vector of `f64`, the iterate type used throughout.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix of `f64`, used by the regression test problems.
pub type Matrix = nalgebra::DMatrix<f64>;

pub use bounds::{
    constant_step_rate, sqrt_decay_mean_rate, step_weighted_log_rate, weighted_ergodic_bound,
    BoundAccumulator, BoundSpec,
};
pub use error::{Error, Result};
pub use kahan::KahanSum;
pub use problems::{
    make_l1_distance, make_l1_regression, make_linf_distance, make_piecewise_linear_max, Objective,
    ProblemInstance,
};
pub use projections::FeasibleSet;
pub use schedules::{eta_constant, eta_sqrt_decay, ScheduleViolation, StepSchedule, ViolationKind};
pub use solver::{
    min_iterate_gap, psg_step, run, AveragingAccumulator, KMargin, Margin, RunOptions, RunSummary,
    SolverState, SolverTrace, StridePolicy, TraceRow, PROOF_RESIDUAL_TOL, SUBGRADIENT_NORM_TOL,
};

/// Membership tolerance used for feasibility checks along a run.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Relative slack allowed when comparing a measured gap against its bound.
pub const BOUND_REL_TOL: f64 = 1e-9;

/// `true` when `gap` exceeds `bound` by more than the relative slack
/// [`BOUND_REL_TOL`]; rounding-level excursions are not violations.
pub fn is_bound_violation(gap: f64, bound: f64) -> bool {
    gap - bound > BOUND_REL_TOL * bound.abs()
}
