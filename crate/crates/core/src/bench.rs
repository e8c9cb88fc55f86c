//! Brute-force grid oracle and the built-in benchmark suite.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{constraint_penalty, make_gate_function, DeformationParams, GateMode};
use crate::domain::{BoxDomain, ConstrainedProblem, Point};
use crate::driver::{
    global_minimize, level_solve, GlobalMinimizeOptions, LevelSolveOptions, SolveReport,
};
use crate::error::{Error, Result};

/// Largest grid the oracle agrees to scan.
pub const MAX_GRID_POINTS: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub grid_step: f64,
    pub points: usize,
    pub feasible_points: usize,
    /// Least objective over feasible grid points (ties: first in scan order).
    pub best_point: Option<Point>,
    pub best_value: Option<f64>,
    /// The requested level, when some feasible grid point lies strictly below it.
    pub sublevel_nonempty_at: Option<f64>,
    pub sublevel_witness: Option<Point>,
}

impl OracleResult {
    pub fn sublevel_nonempty(&self) -> bool {
        self.sublevel_nonempty_at.is_some()
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let mut pts: Vec<f64> = (0..n).map(|j| lo + j as f64 * step).collect();
    let last = *pts.last().expect("at least one point");
    if last > hi {
        pts.pop();
    }
    if pts.last().is_none_or(|&l| hi - l > 1e-12 * (hi - lo)) {
        pts.push(hi);
    } else {
        *pts.last_mut().expect("nonempty") = hi;
    }
    pts
}

#[derive(Clone, Copy, Default)]
struct Scan {
    best: Option<(f64, usize)>,
    feasible: usize,
    below: Option<usize>,
}

fn merge(a: Scan, b: Scan) -> Scan {
    let best = match (a.best, b.best) {
        (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
        (x, y) => x.or(y),
    };
    let below = match (a.below, b.below) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    Scan {
        best,
        feasible: a.feasible + b.feasible,
        below,
    }
}

/// Exhaustive scan of `f` over a regular grid of the problem box. Points
/// with nonzero constraint penalty are skipped.
pub fn grid_oracle(
    problem: &ConstrainedProblem,
    step: f64,
    level: Option<f64>,
) -> Result<OracleResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let domain = problem.domain();
    let axes: Vec<Vec<f64>> = (0..domain.dim())
        .map(|i| {
            let est = (domain.width(i) / step).floor() + 2.0;
            if est > MAX_GRID_POINTS {
                return Err(Error::GridTooLarge {
                    points: est,
                    limit: MAX_GRID_POINTS,
                });
            }
            Ok(axis(domain.lower()[i], domain.upper()[i], step))
        })
        .collect::<Result<_>>()?;
    let total: f64 = axes.iter().map(|a| a.len() as f64).product();
    if total > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge {
            points: total,
            limit: MAX_GRID_POINTS,
        });
    }
    let total = total as usize;
    let point_at = |mut index: usize| -> Point {
        let mut coords = vec![0.0; axes.len()];
        for (d, ax) in axes.iter().enumerate().rev() {
            coords[d] = ax[index % ax.len()];
            index /= ax.len();
        }
        Point::new(coords)
    };

    let scan = (0..total)
        .into_par_iter()
        .map(|i| -> Result<Scan> {
            let x = point_at(i);
            if constraint_penalty(problem, &x)? != 0.0 {
                return Ok(Scan::default());
            }
            let f = problem.objective(&x)?;
            Ok(Scan {
                best: Some((f, i)),
                feasible: 1,
                below: level.filter(|k| f < *k).map(|_| i),
            })
        })
        .try_reduce(Scan::default, |a, b| Ok(merge(a, b)))?;

    Ok(OracleResult {
        grid_step: step,
        points: total,
        feasible_points: scan.feasible,
        best_point: scan.best.map(|(_, i)| point_at(i)),
        best_value: scan.best.map(|(f, _)| f),
        sublevel_nonempty_at: scan.below.and(level),
        sublevel_witness: scan.below.map(point_at),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuiteTask {
    Level { k: f64 },
    Global(GlobalMinimizeOptions),
}

#[derive(Debug, Clone)]
pub struct SuiteProblem {
    pub name: &'static str,
    pub problem: ConstrainedProblem,
    pub params: DeformationParams,
    pub mode: GateMode,
    pub task: SuiteTask,
    pub oracle_step: f64,
    pub note: Option<&'static str>,
}

fn cube(dim: usize, lo: f64, hi: f64) -> BoxDomain {
    BoxDomain::cube(dim, lo, hi).expect("static box is valid")
}

/// `sum (x_i - c_i)^2` for the centre `(2, -2, 2, -2)`.
pub fn shifted_sphere(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| {
            let c = if i % 2 == 0 { 2.0 } else { -2.0 };
            (v - c) * (v - c)
        })
        .sum()
}

/// The clipped shifted sphere `S - offset - |S - offset|` on `[-1.5, 1.5]^4`.
pub fn clipped_sphere(offset: f64) -> ConstrainedProblem {
    ConstrainedProblem::new(cube(4, -1.5, 1.5), move |x| {
        let s = shifted_sphere(x) - offset;
        s - s.abs()
    })
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn global(k_init: f64) -> SuiteTask {
    SuiteTask::Global(GlobalMinimizeOptions {
        k_init,
        ..Default::default()
    })
}

/// The registered problems, in report order.
pub fn builtin_suite() -> Vec<SuiteProblem> {
    let raw = DeformationParams::default();
    vec![
        SuiteProblem {
            name: "sphere1d",
            problem: ConstrainedProblem::new(cube(1, -1.5, 1.5), |x| (x[0] - 1.0).powi(2)),
            params: raw,
            mode: GateMode::RawObjective,
            task: SuiteTask::Level { k: 0.04 },
            oracle_step: 1e-4,
            note: None,
        },
        SuiteProblem {
            name: "sphere2d",
            problem: ConstrainedProblem::new(cube(2, -1.0, 1.0), |x| {
                (x[0] - 0.5).powi(2) + (x[1] + 0.5).powi(2)
            }),
            params: raw,
            mode: GateMode::RawObjective,
            task: global(1.0),
            oracle_step: 0.01,
            note: None,
        },
        SuiteProblem {
            name: "sphere4d",
            problem: ConstrainedProblem::new(cube(4, -1.0, 1.0), |x| {
                x.iter().map(|v| (v - 0.25) * (v - 0.25)).sum()
            }),
            params: raw,
            mode: GateMode::RawObjective,
            task: global(1.0),
            oracle_step: 0.05,
            note: None,
        },
        SuiteProblem {
            name: "paper4d-as-printed",
            problem: clipped_sphere(0.55),
            params: raw,
            mode: GateMode::RawObjective,
            task: SuiteTask::Level { k: 0.0 },
            oracle_step: 0.1,
            note: Some("instance infeasible on its box: min S = 1.0 > 0.55"),
        },
        SuiteProblem {
            name: "paper4d-corrected",
            problem: clipped_sphere(1.5),
            params: raw,
            mode: GateMode::RawObjective,
            task: SuiteTask::Level { k: 0.0 },
            oracle_step: 0.1,
            note: Some("offset raised to 1.5 so that {S < offset} meets the box"),
        },
        SuiteProblem {
            name: "rastrigin2d",
            problem: ConstrainedProblem::new(cube(2, -5.12, 5.12), rastrigin),
            params: raw,
            mode: GateMode::RawObjective,
            task: global(40.0),
            oracle_step: 0.01,
            note: None,
        },
        SuiteProblem {
            name: "rosenbrock2d",
            problem: ConstrainedProblem::new(cube(2, -2.0, 2.0), rosenbrock),
            params: raw,
            mode: GateMode::RawObjective,
            task: SuiteTask::Level { k: 0.5 },
            oracle_step: 0.01,
            note: None,
        },
        SuiteProblem {
            name: "eq-constrained2d",
            // minimize x1 + x2 on the line x1 = x2; optimum -2 at (-1, -1)
            problem: ConstrainedProblem::new(cube(2, -1.0, 1.0), |x| x[0] + x[1])
                .equality(|x| x[0] - x[1]),
            params: DeformationParams {
                t: 0.5,
                big_k: 0.0,
                big_m: 1.0,
                ..raw
            },
            mode: GateMode::DeformedObjective,
            task: SuiteTask::Level { k: -0.25 },
            oracle_step: 0.01,
            note: None,
        },
        SuiteProblem {
            name: "ineq-constrained2d",
            // minimize |x - (1, 1)|^2 subject to x1 + x2 <= 1; optimum 0.5 at (0.5, 0.5)
            problem: ConstrainedProblem::new(cube(2, -2.0, 2.0), |x| {
                (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)
            })
            .inequality(|x| x[0] + x[1] - 1.0),
            params: DeformationParams { big_k: 2.0, ..raw },
            mode: GateMode::DeformedObjective,
            task: SuiteTask::Level { k: 0.0 },
            oracle_step: 0.01,
            note: None,
        },
    ]
}

pub fn suite_names() -> Vec<&'static str> {
    builtin_suite().iter().map(|p| p.name).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub task: &'static str,
    pub mode: GateMode,
    pub status: &'static str,
    /// Level at which the reported witness was certified (or the last level tried).
    pub level: f64,
    /// Level-scale value at the best witness.
    pub best_f: Option<f64>,
    /// Raw objective at the best witness.
    pub objective_at_witness: Option<f64>,
    pub witness: Option<Point>,
    pub oracle_best_f: Option<f64>,
    pub oracle_step: f64,
    pub attempts: usize,
    pub levels: usize,
    /// Number of success certificates independently re-checked.
    pub certificates_checked: usize,
    pub note: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    /// Machine report; contains no timing so it is byte-stable for a fixed seed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:<7} {:<16} {:>14} {:>14} {:>8} {:>10}",
            "problem", "task", "status", "best f", "oracle best f", "attempts", "time"
        );
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<20} {:<7} {:<16} {:>14} {:>14} {:>8} {:>9.3}s",
                row.name,
                row.task,
                row.status,
                fmt(row.objective_at_witness),
                fmt(row.oracle_best_f),
                row.attempts,
                row.wall_time.as_secs_f64()
            );
            if let Some(note) = &row.note {
                let _ = writeln!(out, "    note: {note}");
            }
        }
        out
    }
}

fn status_label(success: bool) -> &'static str {
    if success {
        "Success"
    } else {
        "LevelNotReached"
    }
}

/// Re-evaluates the witness from scratch and checks the strict inequality.
fn check_certificate(sp: &SuiteProblem, report: &SolveReport) -> Result<bool> {
    if !report.is_success() {
        return Ok(false);
    }
    let witness = report
        .witness
        .as_ref()
        .ok_or_else(|| Error::CertificateViolation {
            name: sp.name.into(),
            detail: "success without witness".into(),
        })?;
    let gate = make_gate_function(&sp.problem, &sp.params.with_level(report.level), sp.mode)?;
    let value = gate.level_value(witness)?;
    if !(value < report.level) || !sp.problem.domain().contains(witness)? {
        return Err(Error::CertificateViolation {
            name: sp.name.into(),
            detail: format!(
                "witness {witness} has level value {value}, not below {}",
                report.level
            ),
        });
    }
    Ok(true)
}

pub fn run_suite_problem(sp: &SuiteProblem, seed: u64) -> Result<SuiteRow> {
    let started = Instant::now();
    let opts = LevelSolveOptions {
        mode: sp.mode,
        ..Default::default()
    }
    .with_seed(seed);
    let reports: Vec<SolveReport> = match sp.task {
        SuiteTask::Level { k } => vec![level_solve(&sp.problem, &sp.params.with_level(k), &opts)?],
        SuiteTask::Global(gopts) => global_minimize(&sp.problem, &sp.params, &gopts, &opts)?
            .levels
            .into_iter()
            .map(|l| l.report)
            .collect(),
    };
    let mut checked = 0;
    for r in &reports {
        if check_certificate(sp, r)? {
            checked += 1;
        }
    }
    let best = reports.iter().filter(|r| r.is_success()).min_by(|a, b| {
        a.witness_value
            .unwrap()
            .total_cmp(&b.witness_value.unwrap())
    });
    let last_level = reports.last().map_or(f64::NAN, |r| r.level);
    let oracle = grid_oracle(&sp.problem, sp.oracle_step, None)?;
    Ok(SuiteRow {
        name: sp.name.to_string(),
        task: match sp.task {
            SuiteTask::Level { .. } => "level",
            SuiteTask::Global(_) => "global",
        },
        mode: sp.mode,
        status: status_label(best.is_some()),
        level: best.map_or(last_level, |r| r.level),
        best_f: best.and_then(|r| r.witness_value),
        objective_at_witness: best.and_then(|r| r.objective_value),
        witness: best.and_then(|r| r.witness.clone()),
        oracle_best_f: oracle.best_value,
        oracle_step: sp.oracle_step,
        attempts: reports.iter().map(|r| r.attempts).sum(),
        levels: reports.len(),
        certificates_checked: checked,
        note: sp.note.map(str::to_string),
        wall_time: started.elapsed(),
    })
}

/// Runs the named problems (all of them when `names` is `None`).
pub fn run_builtin_suite(names: Option<&[String]>, seed: u64) -> Result<SuiteReport> {
    let suite = builtin_suite();
    let selected: Vec<&SuiteProblem> = match names {
        None => suite.iter().collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                suite
                    .iter()
                    .find(|p| p.name == n)
                    .ok_or_else(|| Error::UnknownProblem(n.clone()))
            })
            .collect::<Result<_>>()?,
    };
    let rows = selected
        .par_iter()
        .map(|sp| run_suite_problem(sp, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { seed, rows })
}
