//! Derivative-free local minimization (Nelder–Mead) and a deterministic multistart wrapper.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Iteration cap; `None` means `2000 * dimension`.
    pub max_iters: Option<usize>,
    /// Simplex diameter threshold (max coordinate distance to the best vertex).
    pub x_tol: f64,
    /// Spread threshold between the worst and best vertex values.
    pub f_tol: f64,
    /// Initial simplex step per coordinate. Empty means `0.1 * max(1, |x_i|)`;
    /// a single entry is broadcast.
    pub init_step: Vec<f64>,
    /// Seed for any randomized start generation done by callers.
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: None,
            x_tol: 1e-8,
            f_tol: 1e-10,
            init_step: Vec::new(),
            seed: 0,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.x_tol > 0.0) || !(self.f_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if self.init_step.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter(
                "initial steps must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn max_iters_for(&self, dim: usize) -> usize {
        self.max_iters.unwrap_or(2000 * dim.max(1))
    }

    fn steps_for(&self, init: &[f64]) -> Result<Vec<f64>> {
        match self.init_step.len() {
            0 => Ok(init.iter().map(|x| 0.1 * x.abs().max(1.0)).collect()),
            1 => Ok(vec![self.init_step[0]; init.len()]),
            n if n == init.len() => Ok(self.init_step.clone()),
            n => Err(Error::DimensionMismatch {
                expected: init.len(),
                found: n,
            }),
        }
    }
}

/// Best vertex after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub iter: usize,
    pub value: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub minimizer: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
    pub trace: Option<Vec<TracePoint>>,
}

struct Vertex {
    point: Vec<f64>,
    value: f64,
    id: u64,
}

fn sort_simplex(simplex: &mut [Vertex]) {
    simplex.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.id.cmp(&b.id)));
}

fn affine(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

pub fn nelder_mead_minimize<F>(
    objective: F,
    init: &[f64],
    config: &SolverConfig,
) -> Result<LocalResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    config.validate()?;
    let n = init.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "cannot minimize over zero variables".into(),
        ));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial point {init:?} is not finite"
        )));
    }
    let eval = |p: &[f64]| -> Result<f64> {
        let v = objective(p)?;
        if v.is_nan() {
            return Err(Error::NonFinite {
                point: p.to_vec(),
                value: v,
            });
        }
        Ok(v)
    };

    let f0 = eval(init)?;
    if !f0.is_finite() {
        return Err(Error::NonFinite {
            point: init.to_vec(),
            value: f0,
        });
    }
    let steps = config.steps_for(init)?;
    let max_iters = config.max_iters_for(n);

    let mut next_id = 0u64;
    let mut vertex = |point: Vec<f64>, value: f64| {
        next_id += 1;
        Vertex {
            point,
            value,
            id: next_id - 1,
        }
    };

    let mut simplex = Vec::with_capacity(n + 1);
    simplex.push(vertex(init.to_vec(), f0));
    for (i, step) in steps.iter().enumerate() {
        let mut p = init.to_vec();
        p[i] += step;
        let v = eval(&p)?;
        simplex.push(vertex(p, v));
    }

    let mut trace = config.record_trace.then(Vec::new);
    let mut iters = 0;
    let mut converged = false;
    loop {
        sort_simplex(&mut simplex);
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint {
                iter: iters,
                value: simplex[0].value,
                point: simplex[0].point.clone(),
            });
        }

        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.point.iter().zip(&best.point).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[n].value - best.value;
        if x_spread <= config.x_tol && f_spread <= config.f_tol {
            converged = true;
            break;
        }
        if iters >= max_iters {
            break;
        }
        iters += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.point) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let f_best = simplex[0].value;
        let f_second = simplex[n - 1].value;
        let f_worst = simplex[n].value;

        let reflected = affine(&centroid, &simplex[n].point, -REFLECT);
        let f_reflected = eval(&reflected)?;

        if f_reflected < f_best {
            let expanded = affine(&centroid, &reflected, EXPAND);
            let f_expanded = eval(&expanded)?;
            simplex[n] = if f_expanded < f_reflected {
                vertex(expanded, f_expanded)
            } else {
                vertex(reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[n] = vertex(reflected, f_reflected);
            continue;
        }
        let accepted = if f_reflected < f_worst {
            let outside = affine(&centroid, &reflected, CONTRACT);
            let f_outside = eval(&outside)?;
            (f_outside <= f_reflected).then_some((outside, f_outside))
        } else {
            let inside = affine(&centroid, &simplex[n].point, CONTRACT);
            let f_inside = eval(&inside)?;
            (f_inside < f_worst).then_some((inside, f_inside))
        };
        match accepted {
            Some((p, v)) => simplex[n] = vertex(p, v),
            None => {
                let anchor = simplex[0].point.clone();
                for slot in &mut simplex[1..] {
                    let p = affine(&anchor, &slot.point, SHRINK);
                    let v = eval(&p)?;
                    *slot = vertex(p, v);
                }
            }
        }
    }

    let best = simplex.swap_remove(0);
    Ok(LocalResult {
        minimizer: best.point,
        value: best.value,
        iters,
        converged,
        trace,
    })
}

#[derive(Debug)]
pub struct MultistartResult {
    pub best: LocalResult,
    pub best_index: usize,
    /// Starts that raised an error, by index.
    pub failures: Vec<(usize, String)>,
}

/// Runs Nelder–Mead from every start (concurrently) and keeps the least value,
/// ties broken by start index.
pub fn multistart_minimize<F>(
    objective: F,
    starts: &[Vec<f64>],
    config: &SolverConfig,
) -> Result<MultistartResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if starts.is_empty() {
        return Err(Error::NoStarts);
    }
    let runs: Vec<Result<LocalResult>> = starts
        .par_iter()
        .map(|s| nelder_mead_minimize(&objective, s, config))
        .collect();

    let mut failures = Vec::new();
    let mut best: Option<(usize, LocalResult)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|(_, b)| r.value < b.value) {
                    best = Some((i, r));
                }
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    match best {
        Some((best_index, best)) => Ok(MultistartResult {
            best,
            best_index,
            failures,
        }),
        None => Err(Error::AllStartsFailed(failures)),
    }
}
