//! Top-level procedures: a single level solve (find `x` with `f(x) < k`),
//! the cross-section variant along the frequency axis, and the
//! decreasing-level loop that drives certified upper bounds downward.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{
    constraint_penalty, make_gate_function, DeformationParams, Gate, GateMode,
};
use crate::domain::{AugmentedPoint, BoxDomain, ConstrainedProblem, FrequencyVector, Point};
use crate::error::{Error, Result};
use crate::local::{nelder_mead_minimize, LocalResult, SolverConfig};
use crate::reparam::{transform_point, AugmentedObjective, Split, R_MIN};
use crate::trace::TraceRecord;

/// Initial simplex step along each `ln r` coordinate.
const LOG_R_STEP: f64 = 0.01;
/// Initial simplex step along each `x_i`, as a fraction of the box width.
const X_STEP_FRACTION: f64 = 0.01;
/// Upper end of the cross-section frequency scan.
const CROSS_SECTION_R_MAX: f64 = 10.0;
const CROSS_SECTION_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StartPolicy {
    BoxLowerCorner,
    Midpoint,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolveOptions {
    /// Frequency of the first start `(a, r_init)`.
    pub r_init: f64,
    /// Cap on the total number of attempts; `None` runs the whole schedule.
    pub restarts: Option<usize>,
    pub restart_r_schedule: Vec<f64>,
    /// Spatial starts tried at every scheduled frequency, in order.
    pub restart_x_policy: Vec<StartPolicy>,
    pub tied: bool,
    pub mode: GateMode,
    pub solver: SolverConfig,
}

impl Default for LevelSolveOptions {
    fn default() -> Self {
        Self {
            r_init: 0.3,
            restarts: None,
            restart_r_schedule: vec![0.3, 0.2, 0.15, 0.1, 0.075, 0.05],
            restart_x_policy: vec![
                StartPolicy::BoxLowerCorner,
                StartPolicy::Midpoint,
                StartPolicy::SeededRandom,
                StartPolicy::SeededRandom,
                StartPolicy::SeededRandom,
            ],
            tied: true,
            mode: GateMode::RawObjective,
            solver: SolverConfig::default(),
        }
    }
}

impl LevelSolveOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_init >= R_MIN && self.r_init.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r_init = {} must be at least r_min = {R_MIN}",
                self.r_init
            )));
        }
        if let Some(bad) = self
            .restart_r_schedule
            .iter()
            .find(|r| !(**r >= R_MIN && r.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "schedule entry {bad} must be at least r_min = {R_MIN}"
            )));
        }
        if self.restarts == Some(0) {
            return Err(Error::InvalidParameter(
                "restarts must be at least 1".into(),
            ));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Success,
    LevelNotReached,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub level: f64,
    pub mode: GateMode,
    /// Image point `x'` with level value below `level`, on success.
    pub witness: Option<Point>,
    /// Level-scale value at the witness: `f` in raw mode, the deformed objective otherwise.
    pub witness_value: Option<f64>,
    /// Raw objective `f` at the witness.
    pub objective_value: Option<f64>,
    /// Constraint penalty at the witness.
    pub penalty: Option<f64>,
    pub raw_minimizer: AugmentedPoint,
    /// `u` at the raw minimizer.
    pub gate_value: f64,
    /// `w` at the raw minimizer.
    pub augmented_value: f64,
    pub attempts: usize,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
    pub trace_path: Option<String>,
}

impl SolveReport {
    pub fn is_success(&self) -> bool {
        self.status == SolveStatus::Success
    }
}

#[derive(Debug, Clone)]
struct Attempt {
    x: Point,
    r: f64,
}

struct AttemptOutcome {
    point: AugmentedPoint,
    split: Split,
    local: LocalResult,
}

fn random_point(domain: &BoxDomain, rng: &mut ChaCha8Rng) -> Point {
    Point::new(
        domain
            .lower()
            .iter()
            .zip(domain.upper())
            .map(|(a, b)| a + (b - a) * rng.gen::<f64>())
            .collect(),
    )
}

fn build_attempts(domain: &BoxDomain, opts: &LevelSolveOptions) -> Vec<Attempt> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.solver.seed);
    let first = Attempt {
        x: domain.lower_corner(),
        r: opts.r_init,
    };
    let mut attempts = vec![first.clone()];
    for &r in &opts.restart_r_schedule {
        for policy in &opts.restart_x_policy {
            let x = match policy {
                StartPolicy::BoxLowerCorner => domain.lower_corner(),
                StartPolicy::Midpoint => domain.midpoint(),
                StartPolicy::SeededRandom => random_point(domain, &mut rng),
            };
            if x == first.x && r == first.r {
                continue;
            }
            attempts.push(Attempt { x, r });
        }
    }
    if let Some(cap) = opts.restarts {
        attempts.truncate(cap);
    }
    attempts
}

fn search_config(domain: &BoxDomain, tied: bool, base: &SolverConfig) -> SolverConfig {
    let mut cfg = base.clone();
    if cfg.init_step.is_empty() {
        let p = domain.dim();
        cfg.init_step = (0..p).map(|i| X_STEP_FRACTION * domain.width(i)).collect();
        let n_r = if tied { 1 } else { p };
        cfg.init_step.extend(std::iter::repeat_n(LOG_R_STEP, n_r));
    }
    cfg
}

fn frequencies(dim: usize, r: f64, tied: bool) -> Result<FrequencyVector> {
    if tied {
        FrequencyVector::tied(dim, r)
    } else {
        FrequencyVector::free(vec![r; dim])
    }
}

fn run_attempt(
    aug: &AugmentedObjective<Gate>,
    attempt: &Attempt,
    cfg: &SolverConfig,
) -> Result<AttemptOutcome> {
    let dim = aug.domain().dim();
    let start = AugmentedPoint::new(
        attempt.x.clone(),
        frequencies(dim, attempt.r, aug.is_tied())?,
    )?;
    let z0 = aug.encode(&start);
    let local = nelder_mead_minimize(|z| aug.search_value(z), &z0, cfg)?;
    let point = aug.decode(&local.minimizer)?;
    let split = aug.evaluate(&point)?;
    Ok(AttemptOutcome {
        point,
        split,
        local,
    })
}

fn trace_records(
    aug: &AugmentedObjective<Gate>,
    level: f64,
    attempt: usize,
    local: &LocalResult,
) -> Result<Vec<TraceRecord>> {
    let Some(trace) = &local.trace else {
        return Ok(Vec::new());
    };
    let mut best_f = f64::INFINITY;
    let mut out = Vec::with_capacity(trace.len());
    for tp in trace {
        let p = aug.decode(&tp.point)?;
        let split = aug.evaluate(&p)?;
        let image = transform_point(&p.x, &p.r, aug.domain())?;
        best_f = best_f.min(aug.gate().level_value(&image)?);
        out.push(TraceRecord {
            level,
            attempt,
            iter: tp.iter,
            w: split.w,
            u: split.u,
            v: split.v,
            best_f,
            x: p.x.coords().to_vec(),
            r: p.r.free_components().to_vec(),
        });
    }
    Ok(out)
}

struct Certificate {
    witness: Point,
    witness_value: f64,
    objective_value: f64,
    penalty: f64,
}

/// Recomputes the image point and its level value from scratch. Returns
/// `None` if the strict inequality does not hold.
fn certify(gate: &Gate, domain: &BoxDomain, point: &AugmentedPoint) -> Result<Option<Certificate>> {
    let witness = transform_point(&point.x, &point.r, domain)?;
    let witness_value = gate.level_value(&witness)?;
    if !(witness_value < gate.level()) || !domain.contains(&witness)? {
        return Ok(None);
    }
    Ok(Some(Certificate {
        objective_value: gate.problem().objective(&witness)?,
        penalty: constraint_penalty(gate.problem(), &witness)?,
        witness,
        witness_value,
    }))
}

fn report(
    gate: &Gate,
    point: AugmentedPoint,
    split: Split,
    cert: Option<Certificate>,
    attempts: usize,
    trace: Vec<TraceRecord>,
) -> SolveReport {
    let status = if cert.is_some() {
        SolveStatus::Success
    } else {
        SolveStatus::LevelNotReached
    };
    SolveReport {
        status,
        level: gate.level(),
        mode: gate.mode(),
        witness: cert.as_ref().map(|c| c.witness.clone()),
        witness_value: cert.as_ref().map(|c| c.witness_value),
        objective_value: cert.as_ref().map(|c| c.objective_value),
        penalty: cert.as_ref().map(|c| c.penalty),
        raw_minimizer: point,
        gate_value: split.u,
        augmented_value: split.w,
        attempts,
        trace,
        trace_path: None,
    }
}

/// Searches for a point with level value strictly below `params.level`.
///
/// Starts from `(a, r_init)` and then walks the restart schedule. Attempts
/// sharing a frequency run concurrently; results are examined in schedule
/// order and the first minimizer with `u < 0` is returned.
pub fn level_solve(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    opts: &LevelSolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let gate = make_gate_function(problem, params, opts.mode)?;
    let domain = problem.domain().clone();
    let aug = AugmentedObjective::new(gate.clone(), domain.clone(), params.anchor, opts.tied)?;
    let cfg = search_config(&domain, opts.tied, &opts.solver);
    let attempts = build_attempts(&domain, opts);

    let mut trace = Vec::new();
    let mut best: Option<(AugmentedPoint, Split)> = None;
    let mut done = 0;
    let mut start = 0;
    while start < attempts.len() {
        let r = attempts[start].r;
        let end = attempts[start..]
            .iter()
            .position(|a| a.r != r)
            .map_or(attempts.len(), |n| start + n);
        let outcomes: Vec<Result<AttemptOutcome>> = attempts[start..end]
            .par_iter()
            .map(|a| run_attempt(&aug, a, &cfg))
            .collect();
        for (offset, outcome) in outcomes.into_iter().enumerate() {
            let outcome = outcome?;
            let index = start + offset;
            done += 1;
            if cfg.record_trace {
                trace.extend(trace_records(&aug, gate.level(), index, &outcome.local)?);
            }
            if outcome.split.u < 0.0 {
                if let Some(cert) = certify(&gate, &domain, &outcome.point)? {
                    return Ok(report(
                        &gate,
                        outcome.point,
                        outcome.split,
                        Some(cert),
                        done,
                        trace,
                    ));
                }
            }
            let better = best
                .as_ref()
                .is_none_or(|(_, s)| (outcome.split.u, outcome.split.w) < (s.u, s.w));
            if better {
                best = Some((outcome.point, outcome.split));
            }
        }
        start = end;
    }
    let (point, split) = best.expect("at least one attempt is always scheduled");
    Ok(report(&gate, point, split, None, done, trace))
}

/// Minimizes the one-dimensional section `r -> w(anchor_x, r)` with a tied
/// frequency.
///
/// A log-spaced scan over `[r_min, 10]` locates the discrete local minima of
/// the section; with `refine` each is polished by a one-dimensional simplex
/// search in `ln r`. Among the local minima, the deepest one with `u < 0` is
/// chosen; if none has `u < 0`, the deepest overall.
pub fn cross_section_solve(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    anchor_x: Option<&Point>,
    refine: bool,
    opts: &LevelSolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let gate = make_gate_function(problem, params, opts.mode)?;
    let domain = problem.domain().clone();
    let aug = AugmentedObjective::new(gate.clone(), domain.clone(), params.anchor, true)?;
    let anchor_x = match anchor_x {
        Some(x) => x.clone(),
        None => domain.midpoint(),
    };
    if !domain.contains(&anchor_x)? {
        return Err(Error::InvalidParameter(format!(
            "cross-section anchor {anchor_x} lies outside the box"
        )));
    }
    let dim = domain.dim();
    let at = |r: f64| -> Result<(AugmentedPoint, Split)> {
        let p = AugmentedPoint::new(anchor_x.clone(), FrequencyVector::tied(dim, r)?)?;
        let s = aug.evaluate(&p)?;
        Ok((p, s))
    };

    let (lo, hi) = (R_MIN.ln(), CROSS_SECTION_R_MAX.ln());
    let grid: Vec<f64> = (0..CROSS_SECTION_GRID)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (CROSS_SECTION_GRID - 1) as f64;
            s.exp().max(R_MIN)
        })
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&r| at(r).map(|(_, s)| s.w))
        .collect::<Result<_>>()?;

    let n = values.len();
    let minima: Vec<usize> = (0..n)
        .filter(|&i| {
            (i == 0 || values[i] <= values[i - 1]) && (i + 1 == n || values[i] <= values[i + 1])
        })
        .collect();

    let spacing = (hi - lo) / (CROSS_SECTION_GRID - 1) as f64;
    let section = |z: &[f64]| -> Result<f64> {
        let r = z[0].exp();
        if !(r >= R_MIN && r.is_finite()) {
            return Ok(f64::INFINITY);
        }
        Ok(at(r)?.1.w)
    };
    let one_d = SolverConfig {
        init_step: vec![spacing],
        record_trace: false,
        ..opts.solver.clone()
    };
    let candidates: Vec<(AugmentedPoint, Split)> = minima
        .par_iter()
        .map(|&i| {
            let r = if refine {
                nelder_mead_minimize(section, &[grid[i].ln()], &one_d)?.minimizer[0].exp()
            } else {
                grid[i]
            };
            at(r.max(R_MIN))
        })
        .collect::<Result<_>>()?;

    let pick = |only_negative: bool| {
        candidates
            .iter()
            .filter(|(_, s)| !only_negative || s.u < 0.0)
            .min_by(|a, b| a.1.w.total_cmp(&b.1.w))
    };
    let (point, split) = pick(true)
        .or_else(|| pick(false))
        .cloned()
        .expect("the scan always has a minimum");
    let cert = if split.u < 0.0 {
        certify(&gate, &domain, &point)?
    } else {
        None
    };
    Ok(report(
        &gate,
        point,
        split,
        cert,
        candidates.len(),
        Vec::new(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMinimizeOptions {
    pub k_init: f64,
    /// Fraction in `(0, 1)`; after a success at value `f*` the next level is
    /// `f* - max(absolute_step, (1 - shrink) |f*|)`.
    pub shrink: f64,
    pub absolute_step: f64,
    pub max_levels: usize,
    /// Stop after this many consecutive failed levels.
    pub give_up_after: usize,
}

impl Default for GlobalMinimizeOptions {
    fn default() -> Self {
        Self {
            k_init: 0.0,
            shrink: 0.5,
            absolute_step: 1e-4,
            max_levels: 20,
            give_up_after: 3,
        }
    }
}

impl GlobalMinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.k_init.is_finite() {
            return Err(Error::InvalidParameter("k_init must be finite".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if !(self.absolute_step > 0.0 && self.absolute_step.is_finite()) {
            return Err(Error::InvalidParameter(
                "absolute_step must be positive".into(),
            ));
        }
        if self.max_levels == 0 || self.give_up_after == 0 {
            return Err(Error::InvalidParameter(
                "max_levels and give_up_after must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelOutcome {
    pub k: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalReport {
    pub levels: Vec<LevelOutcome>,
    pub best_point: Option<Point>,
    pub best_value: Option<f64>,
}

impl GlobalReport {
    pub fn trace(&self) -> Vec<TraceRecord> {
        self.levels
            .iter()
            .flat_map(|l| l.report.trace.iter().cloned())
            .collect()
    }
}

/// Repeated level solves with a decreasing level.
///
/// After a success with witness value `f*`, the next level is
/// `f* - max(absolute_step, (1 - shrink) |f*|)`. After a failure the level
/// moves halfway back toward the best value found so far (or stays put, with a
/// fresh seed, when nothing has succeeded yet).
pub fn global_minimize(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    gopts: &GlobalMinimizeOptions,
    opts: &LevelSolveOptions,
) -> Result<GlobalReport> {
    gopts.validate()?;
    let mut levels = Vec::new();
    let mut best: Option<(Point, f64)> = None;
    let mut k = gopts.k_init;
    let mut failures = 0;
    for index in 0..gopts.max_levels {
        let mut level_opts = opts.clone();
        level_opts.solver.seed = opts.solver.seed.wrapping_add(index as u64);
        let report = level_solve(problem, &params.with_level(k), &level_opts)?;
        let success = match (&report.witness, report.witness_value) {
            (Some(w), Some(value)) if report.is_success() => Some((w.clone(), value)),
            _ => None,
        };
        levels.push(LevelOutcome { k, report });
        match success {
            Some((point, value)) => {
                failures = 0;
                if best.as_ref().is_none_or(|(_, b)| value < *b) {
                    best = Some((point, value));
                }
                k = value - gopts.absolute_step.max((1.0 - gopts.shrink) * value.abs());
            }
            None => {
                failures += 1;
                if failures >= gopts.give_up_after {
                    break;
                }
                if let Some((_, b)) = &best {
                    k = 0.5 * (b + k);
                }
            }
        }
    }
    let (best_point, best_value) = match best {
        Some((p, v)) => (Some(p), Some(v)),
        None => (None, None),
    };
    Ok(GlobalReport {
        levels,
        best_point,
        best_value,
    })
}
