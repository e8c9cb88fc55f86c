//! Value types shared by the whole crate: boxes, points, frequency vectors
//! and constrained problem definitions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};

/// A product of closed intervals `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBox("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidBox(format!(
                "lower has {} entries but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidBox(format!(
                    "interval {i} has a non-finite bound"
                )));
            }
            if a >= b {
                return Err(Error::InvalidBox(format!(
                    "interval {i} is [{a}, {b}]; lower bound must be strictly below upper"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` repeated `dim` times.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p[0]).collect(),
            pairs.iter().map(|p| p[1]).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn midpoint(&self) -> Point {
        Point(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }

    pub fn lower_corner(&self) -> Point {
        Point(self.lower.clone())
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(x.dim())?;
        Ok(x.coords()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *a <= *v && *v <= *b))
    }

    /// True when every interval of `self` lies inside the matching interval of `other`.
    pub fn is_subset_of(&self, other: &BoxDomain) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|i| other.lower[i] <= self.lower[i] && self.upper[i] <= other.upper[i])
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Positive per-coordinate frequency parameters `r_1..r_p`.
///
/// In tied mode all components hold the same bits; the search then has a
/// single frequency degree of freedom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyVector {
    values: Vec<f64>,
    tied: bool,
}

impl FrequencyVector {
    pub fn tied(dim: usize, r: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFrequency(
                "dimension must be at least 1".into(),
            ));
        }
        check_positive(r)?;
        Ok(Self {
            values: vec![r; dim],
            tied: true,
        })
    }

    pub fn free(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFrequency(
                "dimension must be at least 1".into(),
            ));
        }
        for &r in &values {
            check_positive(r)?;
        }
        Ok(Self {
            values,
            tied: false,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_tied(&self) -> bool {
        self.tied
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The distinct search components: one value when tied, all of them otherwise.
    pub fn free_components(&self) -> &[f64] {
        if self.tied {
            &self.values[..1]
        } else {
            &self.values
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_positive(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidFrequency(format!(
            "frequency must be a positive finite real, got {r}"
        )));
    }
    Ok(())
}

/// The solver's search variable `(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedPoint {
    pub x: Point,
    pub r: FrequencyVector,
}

impl AugmentedPoint {
    pub fn new(x: Point, r: FrequencyVector) -> Result<Self> {
        if x.dim() != r.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: r.dim(),
            });
        }
        Ok(Self { x, r })
    }
}

/// A scalar function that may fail on evaluation.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync>;

/// `argmin f(x)` subject to `g_i(x) = 0`, `h_j(x) <= 0` over a box.
#[derive(Clone)]
pub struct ConstrainedProblem {
    objective: ScalarFn,
    equalities: Vec<ScalarFn>,
    inequalities: Vec<ScalarFn>,
    domain: BoxDomain,
}

impl fmt::Debug for ConstrainedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedProblem")
            .field("domain", &self.domain)
            .field("equalities", &self.equalities.len())
            .field("inequalities", &self.inequalities.len())
            .finish_non_exhaustive()
    }
}

impl ConstrainedProblem {
    /// An unconstrained problem with an infallible objective.
    pub fn new<F>(domain: BoxDomain, objective: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::with_fallible_objective(domain, Arc::new(move |x: &[f64]| Ok(objective(x))))
    }

    pub fn with_fallible_objective(domain: BoxDomain, objective: ScalarFn) -> Self {
        Self {
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            domain,
        }
    }

    /// Adds a constraint `g(x) = 0`.
    pub fn equality<F>(self, g: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.fallible_equality(Arc::new(move |x: &[f64]| Ok(g(x))))
    }

    /// Adds a constraint `h(x) <= 0`.
    pub fn inequality<F>(self, h: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.fallible_inequality(Arc::new(move |x: &[f64]| Ok(h(x))))
    }

    pub fn fallible_equality(mut self, g: ScalarFn) -> Self {
        self.equalities.push(g);
        self
    }

    pub fn fallible_inequality(mut self, h: ScalarFn) -> Self {
        self.inequalities.push(h);
        self
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn num_inequalities(&self) -> usize {
        self.inequalities.len()
    }

    pub fn is_unconstrained(&self) -> bool {
        self.equalities.is_empty() && self.inequalities.is_empty()
    }

    pub fn objective(&self, x: &Point) -> Result<f64> {
        self.call(&self.objective, x)
    }

    pub fn equality_values(&self, x: &Point) -> Result<Vec<f64>> {
        self.equalities.iter().map(|g| self.call(g, x)).collect()
    }

    pub fn inequality_values(&self, x: &Point) -> Result<Vec<f64>> {
        self.inequalities.iter().map(|h| self.call(h, x)).collect()
    }

    fn call(&self, func: &ScalarFn, x: &Point) -> Result<f64> {
        self.domain.check_dim(x.dim())?;
        let value = func(x.coords()).map_err(|source| Error::Evaluation {
            point: x.coords().to_vec(),
            source,
        })?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                point: x.coords().to_vec(),
                value,
            });
        }
        Ok(value)
    }
}
