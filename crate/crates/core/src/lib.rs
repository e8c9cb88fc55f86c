//! Box-constrained global optimization by sinusoidal reparametrization.
//!
//! The search for a point with `f(x) < k` is turned into a local
//! minimization. The level gate `g = f - k - |f - k|` is nonpositive and
//! negative exactly on the sublevel set; it is pulled back through a
//! many-to-one sine map of the box, a convex anchor term is added, and a
//! derivative-free local method minimizes the result over the point and the
//! map's frequency. Any minimizer with a negative pulled-back gate is a
//! certified witness. Lowering `k` after each success drives the certified
//! value toward the global minimum.
//!
//! Constrained problems are folded into a single function with the exact
//! penalty `sum |g_i| + sum (h_j + |h_j|)` first.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod deformation;
pub mod domain;
pub mod driver;
pub mod dsl;
pub mod error;
pub mod local;
pub mod reparam;
pub mod trace;

pub use deformation::{
    clip_nonpositive, constraint_penalty, deformed_objective, level_gate, make_gate_function,
    DeformationParams, Gate, GateFn, GateMode,
};
pub use domain::{AugmentedPoint, BoxDomain, ConstrainedProblem, FrequencyVector, Point, ScalarFn};
pub use driver::{
    cross_section_solve, global_minimize, level_solve, GlobalMinimizeOptions, GlobalReport,
    LevelOutcome, LevelSolveOptions, SolveReport, SolveStatus, StartPolicy,
};
pub use error::{Error, EvalError, Result};
pub use local::{multistart_minimize, nelder_mead_minimize, LocalResult, SolverConfig};
pub use reparam::{
    anchor_term, augmented_objective, pulled_back_gate, transform_point, AugmentedObjective, R_MIN,
};
pub use trace::TraceRecord;
