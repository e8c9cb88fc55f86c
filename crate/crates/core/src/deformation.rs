//! Exact-penalty deformation, nonpositive clipping and level gates.
//!
//! A *gate* is a function into `(-inf, 0]` that is strictly negative exactly
//! on the region the search is looking for. Two flavours are provided:
//!
//! * [`GateMode::RawObjective`]: `x -> level_gate(f(x), k)`, negative iff `f(x) < k`.
//! * [`GateMode::DeformedObjective`]: `x -> clip_nonpositive(f_t(x) - k)` where
//!   `f_t = (1 - t)(f - K) + t M P(x)` and `P` is the exact penalty
//!   `sum |g_i| + sum (h_j + |h_j|)`.
//!
//! The penalty uses `h + |h|`, which is `2 max(h, 0)` and vanishes exactly on
//! `h <= 0`.

use serde::{Deserialize, Serialize};

use crate::domain::{ConstrainedProblem, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    /// Mixing weight in `(0, 1)`; close to 1 favours feasibility.
    pub t: f64,
    /// Shift `K` applied to the objective.
    pub big_k: f64,
    /// Penalty weight `M > 0`.
    pub big_m: f64,
    /// Threshold `k`; on the raw scale in raw mode and on the deformed scale otherwise.
    pub level: f64,
    /// Anchor constant `rho > 0` for the frequency part of the convex anchor term.
    pub anchor: f64,
}

impl Default for DeformationParams {
    fn default() -> Self {
        Self {
            t: 0.99,
            big_k: 0.0,
            big_m: 1e3,
            level: 0.0,
            anchor: 2.0,
        }
    }
}

impl DeformationParams {
    pub fn with_level(mut self, level: f64) -> Self {
        self.level = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "t must lie in (0, 1), got {}",
                self.t
            )));
        }
        if !(self.big_m > 0.0 && self.big_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "M must be positive, got {}",
                self.big_m
            )));
        }
        if !(self.anchor > 0.0 && self.anchor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {}",
                self.anchor
            )));
        }
        if !self.big_k.is_finite() {
            return Err(Error::InvalidParameter("K must be finite".into()));
        }
        if !self.level.is_finite() {
            return Err(Error::InvalidParameter("level k must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GateMode {
    #[default]
    RawObjective,
    DeformedObjective,
}

/// `sum_i |g_i(x)| + sum_j (h_j(x) + |h_j(x)|)`.
pub fn constraint_penalty(problem: &ConstrainedProblem, x: &Point) -> Result<f64> {
    let eq: f64 = problem.equality_values(x)?.iter().map(|g| g.abs()).sum();
    let ineq: f64 = problem
        .inequality_values(x)?
        .iter()
        .map(|h| h + h.abs())
        .sum();
    Ok(eq + ineq)
}

/// `(1 - t)(f(x) - K) + t M penalty(x)`.
pub fn deformed_objective(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    x: &Point,
) -> Result<f64> {
    let f = problem.objective(x)?;
    let penalty = constraint_penalty(problem, x)?;
    let value = (1.0 - params.t) * (f - params.big_k) + params.t * params.big_m * penalty;
    if !value.is_finite() {
        return Err(Error::NonFinite {
            point: x.coords().to_vec(),
            value,
        });
    }
    Ok(value)
}

/// `phi - |phi|`, i.e. `2 min(phi, 0)`.
#[inline]
pub fn clip_nonpositive(phi: f64) -> f64 {
    phi - phi.abs()
}

/// `f - k - |f - k|`: strictly negative exactly when `f < k`.
#[inline]
pub fn level_gate(f_value: f64, k: f64) -> f64 {
    clip_nonpositive(f_value - k)
}

/// Anything usable as a gate: a function of a point into `(-inf, 0]`.
pub trait GateFn: Send + Sync {
    fn gate(&self, x: &Point) -> Result<f64>;
}

impl<F> GateFn for F
where
    F: Fn(&Point) -> Result<f64> + Send + Sync,
{
    fn gate(&self, x: &Point) -> Result<f64> {
        self(x)
    }
}

/// Gate built from a problem by [`make_gate_function`].
#[derive(Debug, Clone)]
pub struct Gate {
    problem: ConstrainedProblem,
    params: DeformationParams,
    mode: GateMode,
}

impl Gate {
    pub fn mode(&self) -> GateMode {
        self.mode
    }

    pub fn level(&self) -> f64 {
        self.params.level
    }

    pub fn problem(&self) -> &ConstrainedProblem {
        &self.problem
    }

    pub fn params(&self) -> &DeformationParams {
        &self.params
    }

    /// The quantity compared against the level: `f(x)` in raw mode, the
    /// deformed objective otherwise.
    pub fn level_value(&self, x: &Point) -> Result<f64> {
        match self.mode {
            GateMode::RawObjective => self.problem.objective(x),
            GateMode::DeformedObjective => deformed_objective(&self.problem, &self.params, x),
        }
    }
}

impl GateFn for Gate {
    fn gate(&self, x: &Point) -> Result<f64> {
        Ok(level_gate(self.level_value(x)?, self.params.level))
    }
}

pub fn make_gate_function(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    mode: GateMode,
) -> Result<Gate> {
    params.validate()?;
    Ok(Gate {
        problem: problem.clone(),
        params: *params,
        mode,
    })
}
