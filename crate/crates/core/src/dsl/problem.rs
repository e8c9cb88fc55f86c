//! Problem files: a JSON document naming the box, the objective and the
//! constraints as expressions.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "box": [[-1, 1], [-1, 1]],
//!   "objective": "(x1 - 0.5)^2 + x2^2",
//!   "equalities": [],
//!   "inequalities": ["x1 + x2 - 1"],
//!   "params": { "t": 0.99, "K": 0, "M": 1000, "k": 0.1, "rho": 2, "r_init": 0.3 }
//! }
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ast::Expr;
use super::parser::parse_expr;
use crate::deformation::DeformationParams;
use crate::domain::{BoxDomain, ConstrainedProblem, ScalarFn};
use crate::error::{Error, Result};

/// Optional overrides carried by a problem file. Absent fields fall back to
/// library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub t: Option<f64>,
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    #[serde(rename = "M")]
    pub big_m: Option<f64>,
    pub k: Option<f64>,
    pub rho: Option<f64>,
    pub r_init: Option<f64>,
}

impl ParamOverrides {
    /// Applies the overrides on top of `base`. `r_init` is not a deformation
    /// parameter and is left to the caller.
    pub fn apply(&self, base: DeformationParams) -> DeformationParams {
        DeformationParams {
            t: self.t.unwrap_or(base.t),
            big_k: self.big_k.unwrap_or(base.big_k),
            big_m: self.big_m.unwrap_or(base.big_m),
            level: self.k.unwrap_or(base.level),
            anchor: self.rho.unwrap_or(base.anchor),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    dimension: usize,
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
    objective: String,
    #[serde(default)]
    equalities: Vec<String>,
    #[serde(default)]
    inequalities: Vec<String>,
    #[serde(default)]
    params: Option<ParamOverrides>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub domain: BoxDomain,
    pub objective: Expr,
    pub equalities: Vec<Expr>,
    pub inequalities: Vec<Expr>,
    pub params: ParamOverrides,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn expression(path: String, source: &str, dimension: usize) -> Result<Expr> {
    parse_expr(source, dimension).map_err(|source| Error::Expression { path, source })
}

pub fn load_problem(contents: &str) -> Result<ProblemSpec> {
    let de = &mut serde_json::Deserializer::from_str(contents);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;

    if file.dimension == 0 {
        return Err(schema("dimension", "must be at least 1"));
    }
    if file.bounds.len() != file.dimension {
        return Err(schema(
            "box",
            format!(
                "has {} intervals but dimension is {}",
                file.bounds.len(),
                file.dimension
            ),
        ));
    }
    for (i, [lo, hi]) in file.bounds.iter().enumerate() {
        if !(lo < hi) {
            return Err(schema(
                format!("box[{i}]"),
                format!("[{lo}, {hi}] is not a proper interval"),
            ));
        }
    }
    let domain = BoxDomain::from_pairs(&file.bounds).map_err(|e| schema("box", e.to_string()))?;
    let p = file.dimension;
    let objective = expression("objective".into(), &file.objective, p)?;
    let equalities = file
        .equalities
        .iter()
        .enumerate()
        .map(|(i, s)| expression(format!("equalities[{i}]"), s, p))
        .collect::<Result<_>>()?;
    let inequalities = file
        .inequalities
        .iter()
        .enumerate()
        .map(|(i, s)| expression(format!("inequalities[{i}]"), s, p))
        .collect::<Result<_>>()?;

    let params = file.params.unwrap_or_default();
    let resolved = params.apply(DeformationParams::default());
    resolved
        .validate()
        .map_err(|e| schema("params", e.to_string()))?;
    if let Some(r) = params.r_init {
        if !(r >= crate::reparam::R_MIN && r.is_finite()) {
            return Err(schema(
                "params.r_init",
                format!("must be at least {}", crate::reparam::R_MIN),
            ));
        }
    }

    Ok(ProblemSpec {
        dimension: p,
        domain,
        objective,
        equalities,
        inequalities,
        params,
    })
}

fn to_fn(expr: &Expr) -> ScalarFn {
    let expr = Arc::new(expr.clone());
    Arc::new(move |x: &[f64]| expr.eval(x))
}

impl ProblemSpec {
    pub fn to_problem(&self) -> ConstrainedProblem {
        let mut problem = ConstrainedProblem::with_fallible_objective(
            self.domain.clone(),
            to_fn(&self.objective),
        );
        for g in &self.equalities {
            problem = problem.fallible_equality(to_fn(g));
        }
        for h in &self.inequalities {
            problem = problem.fallible_inequality(to_fn(h));
        }
        problem
    }

    pub fn deformation_params(&self) -> DeformationParams {
        self.params.apply(DeformationParams::default())
    }

    pub fn is_constrained(&self) -> bool {
        !(self.equalities.is_empty() && self.inequalities.is_empty())
    }
}
