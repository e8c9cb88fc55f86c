//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sinegate_core::bench::{
    builtin_suite, grid_oracle, clipped_sphere, shifted_sphere, rastrigin, run_builtin_suite,
    SuiteTask,
};
use sinegate_core::dsl::parse_expr;
use sinegate_core::reparam::transform_coord;
use sinegate_core::{
    clip_nonpositive, constraint_penalty, global_minimize, level_gate, level_solve,
    transform_point, BoxDomain, ConstrainedProblem, DeformationParams, FrequencyVector, GateMode,
    GlobalMinimizeOptions, LevelSolveOptions, Point, SolveReport, R_MIN,
};

use common::{garbage, random_expr, ulp_distance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 1. Transform range.
fn transform_range() -> Outcome {
    const TRIALS: usize = 1_000_000;
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut violations = 0usize;
    for _ in 0..TRIALS {
        let dim = rng.gen_range(1..=4);
        let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let upper: Vec<f64> = lower.iter().map(|a| a + rng.gen_range(1e-6..1e3)).collect();
        let domain = BoxDomain::new(lower, upper).unwrap();
        let x = Point::new((0..dim).map(|_| rng.gen_range(-1e4..1e4)).collect());
        let r =
            FrequencyVector::free((0..dim).map(|_| rng.gen_range(R_MIN..=10.0)).collect()).unwrap();
        let y = transform_point(&x, &r, &domain).unwrap();
        for (i, yi) in y.coords().iter().enumerate() {
            if !(*yi >= domain.lower()[i] - TOL && *yi <= domain.upper()[i] + TOL) {
                violations += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(
        violations == 0 && elapsed < Duration::from_secs(5),
        format!(
            "{TRIALS} triples, {violations} out of box, {:.2}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn spread_value<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(-1.0..1.0),
        1 => rng.gen_range(-1e12..1e12),
        2 => rng.gen_range(-1e-12..1e-12),
        3 => 0.0,
        _ => rng.gen_range(-100.0..100.0f64).round(),
    }
}

/// 2. Sign equivalences.
fn sign_equivalences() -> Outcome {
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sign_bad, mut clip_bad) = (0, 0);
    for i in 0..TRIALS {
        let f = spread_value(&mut rng);
        let k = match i % 4 {
            // neighbouring doubles and exact ties stress the strict comparison
            0 => f64::from_bits(f.to_bits() + 1),
            1 => f,
            _ => spread_value(&mut rng),
        };
        if (level_gate(f, k) < 0.0) != (f < k) {
            sign_bad += 1;
        }
        let phi = f - k;
        if ulp_distance(clip_nonpositive(phi), 2.0 * phi.min(0.0)) > 1 {
            clip_bad += 1;
        }
    }
    ensure(
        sign_bad == 0 && clip_bad == 0,
        format!("{TRIALS} pairs, {sign_bad} sign mismatches, {clip_bad} clip values beyond 1 ulp"),
    )
}

/// 3. Penalty feasibility.
fn penalty_feasibility() -> Outcome {
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // g_i(x) = x_i and h_j(x) = x_{m+j}, so a point is a tuple of constraint values
    let shapes: Vec<(usize, usize, ConstrainedProblem)> = (0..=3)
        .flat_map(|m| (0..=3).map(move |l| (m, l)))
        .filter(|&(m, l)| m + l > 0)
        .map(|(m, l)| {
            let domain = BoxDomain::cube(m + l, -1e13, 1e13).unwrap();
            let mut p = ConstrainedProblem::new(domain, |_| 0.0);
            for i in 0..m {
                p = p.equality(move |x| x[i]);
            }
            for j in 0..l {
                p = p.inequality(move |x| x[m + j]);
            }
            (m, l, p)
        })
        .collect();
    let (mut bad, mut feasible) = (0, 0);
    for _ in 0..TRIALS {
        let (m, l, p) = &shapes[rng.gen_range(0..shapes.len())];
        let values: Vec<f64> = (0..m + l)
            .map(|_| {
                if rng.gen_bool(0.6) {
                    0.0
                } else {
                    spread_value(&mut rng)
                }
            })
            .collect();
        let is_feasible =
            values[..*m].iter().all(|g| g.abs() == 0.0) && values[*m..].iter().all(|h| *h <= 0.0);
        let penalty = constraint_penalty(p, &Point::new(values)).unwrap();
        if (penalty == 0.0) != is_feasible {
            bad += 1;
        }
        feasible += usize::from(is_feasible);
    }
    ensure(
        bad == 0,
        format!("{TRIALS} tuples ({feasible} feasible), {bad} mismatches"),
    )
}

/// Level-scale value recomputed from the problem's raw functions.
fn recomputed_level_value(
    problem: &ConstrainedProblem,
    params: &DeformationParams,
    mode: GateMode,
    w: &Point,
) -> f64 {
    let f = problem.objective(w).unwrap();
    match mode {
        GateMode::RawObjective => f,
        GateMode::DeformedObjective => {
            let eq: f64 = problem
                .equality_values(w)
                .unwrap()
                .iter()
                .map(|g| g.abs())
                .sum();
            let ineq: f64 = problem
                .inequality_values(w)
                .unwrap()
                .iter()
                .map(|h| h + h.abs())
                .sum();
            (1.0 - params.t) * (f - params.big_k) + params.t * params.big_m * (eq + ineq)
        }
    }
}

/// 4. Certificate soundness over the built-in suite.
fn certificate_soundness() -> Outcome {
    let (mut checked, mut violations) = (0, 0);
    for sp in builtin_suite() {
        for seed in 0..5 {
            let opts = LevelSolveOptions {
                mode: sp.mode,
                ..Default::default()
            }
            .with_seed(seed);
            let reports: Vec<SolveReport> = match sp.task {
                SuiteTask::Level { k } => {
                    vec![level_solve(&sp.problem, &sp.params.with_level(k), &opts).unwrap()]
                }
                SuiteTask::Global(g) => global_minimize(&sp.problem, &sp.params, &g, &opts)
                    .unwrap()
                    .levels
                    .into_iter()
                    .map(|l| l.report)
                    .collect(),
            };
            for r in reports.iter().filter(|r| r.is_success()) {
                checked += 1;
                let w = r.witness.as_ref().unwrap();
                let value = recomputed_level_value(&sp.problem, &sp.params, sp.mode, w);
                if value >= r.level || value.is_nan() || !sp.problem.domain().contains(w).unwrap() {
                    violations += 1;
                }
            }
        }
    }
    let harness = run_builtin_suite(None, 0)
        .map(|_| ())
        .map_err(|e| e.to_string());
    ensure(
        checked > 0 && violations == 0 && harness.is_ok(),
        format!(
            "{checked} witnesses re-evaluated, {violations} violations, suite harness {harness:?}"
        ),
    )
}

/// 5. One-dimensional level solve.
fn one_dimensional_level() -> Outcome {
    let problem = ConstrainedProblem::new(BoxDomain::cube(1, -1.5, 1.5).unwrap(), |x| {
        (x[0] - 1.0).powi(2)
    });
    let params = DeformationParams::default().with_level(0.04);
    let oracle = grid_oracle(&problem, 1e-4, Some(0.04)).unwrap();
    let (mut successes, mut slow, mut outside) = (0, 0, 0);
    let mut slowest = Duration::ZERO;
    for seed in 0..100 {
        let started = Instant::now();
        let r = level_solve(
            &problem,
            &params,
            &LevelSolveOptions::default().with_seed(seed),
        )
        .unwrap();
        let elapsed = started.elapsed();
        slowest = slowest.max(elapsed);
        slow += usize::from(elapsed >= Duration::from_secs(1));
        if r.is_success() {
            let w = r.witness.as_ref().unwrap().coords()[0];
            if w > 0.8 && w < 1.2 && problem.objective(&Point::new(vec![w])).unwrap() < 0.04 {
                successes += 1;
            } else {
                outside += 1;
            }
        }
    }
    ensure(
        successes >= 95 && slow == 0 && outside == 0 && oracle.sublevel_nonempty(),
        format!(
            "{successes}/100 successes (need 95), {outside} witnesses outside (0.8, 1.2), slowest run {:.3}s, \
             oracle step 1e-4 sublevel nonempty: {}",
            slowest.as_secs_f64(),
            oracle.sublevel_nonempty()
        ),
    )
}

/// 6. Four-dimensional clipped sphere, offsets 1.5 and 0.55.
fn four_dimensional_instance() -> Outcome {
    let params = DeformationParams::default().with_level(0.0);
    let opts = LevelSolveOptions::default();
    let schedule_len = 1 + opts.restart_r_schedule.len() * opts.restart_x_policy.len() - 1;

    let corrected = clipped_sphere(1.5);
    let r = level_solve(&corrected, &params, &opts).unwrap();
    let s = r.witness.as_ref().map(|w| shifted_sphere(w.coords()));
    let oracle = grid_oracle(&corrected, 0.1, Some(0.0)).unwrap();
    let corrected_ok = r.is_success()
        && r.attempts <= schedule_len
        && s.is_some_and(|s| s < 1.5)
        && oracle.sublevel_nonempty();

    let printed = clipped_sphere(0.55);
    let p = level_solve(&printed, &params, &opts).unwrap();
    let printed_ok = !p.is_success() && p.gate_value == 0.0;

    ensure(
        corrected_ok && printed_ok,
        format!(
            "offset 1.5: {:?} after {} attempts, S(witness) = {s:?}, oracle nonempty {}; offset 0.55: {:?} with u = {}",
            r.status,
            r.attempts,
            oracle.sublevel_nonempty(),
            p.status,
            p.gate_value
        ),
    )
}

/// 7. Global loop.
fn global_loop() -> Outcome {
    let parabola = ConstrainedProblem::new(BoxDomain::cube(1, -1.0, 1.0).unwrap(), |x| x[0] * x[0]);
    let g = GlobalMinimizeOptions {
        k_init: 1.0,
        max_levels: 20,
        ..Default::default()
    };
    let started = Instant::now();
    let a = global_minimize(
        &parabola,
        &DeformationParams::default(),
        &g,
        &LevelSolveOptions::default(),
    )
    .unwrap();
    let ta = started.elapsed();
    let best_a = a.best_value.unwrap_or(f64::INFINITY);

    let rast = ConstrainedProblem::new(BoxDomain::cube(2, -5.12, 5.12).unwrap(), rastrigin);
    let g = GlobalMinimizeOptions {
        k_init: 40.0,
        ..Default::default()
    };
    let started = Instant::now();
    let b = global_minimize(
        &rast,
        &DeformationParams::default(),
        &g,
        &LevelSolveOptions::default(),
    )
    .unwrap();
    let tb = started.elapsed();
    let best_b = b.best_value.unwrap_or(f64::INFINITY);

    let limit = Duration::from_secs(30);
    ensure(
        best_a <= 1e-3 && a.levels.len() <= 20 && best_b <= 0.5 && ta < limit && tb < limit,
        format!(
            "x^2: best {best_a:e} in {} levels ({:.3}s); rastrigin: best {best_b:e} in {} levels ({:.3}s)",
            a.levels.len(),
            ta.as_secs_f64(),
            b.levels.len(),
            tb.as_secs_f64()
        ),
    )
}

/// 8. Multiplicity growth.
fn multiplicity_growth() -> Outcome {
    const POINTS: usize = 100_000;
    let (lo, hi, target) = (-1.5, 1.5, 1.0);
    let counts: Vec<usize> = [2.0, 1.0, 0.5, 0.25]
        .iter()
        .map(|&r| {
            let values: Vec<f64> = (0..POINTS)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / (POINTS - 1) as f64;
                    transform_coord(x, r, lo, hi) - target
                })
                .collect();
            values
                .windows(2)
                .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
                .count()
        })
        .collect();
    ensure(
        counts.windows(2).all(|w| w[1] >= w[0]),
        format!("sign changes at r = 2, 1, 0.5, 0.25: {counts:?}"),
    )
}

/// 9. Parser oracle equivalence and error totality.
fn parser_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut compared, mut both_failed, mut mismatches) = (0, 0, 0);
    for _ in 0..50 {
        let oracle = random_expr(&mut rng, 6, 3);
        let source = oracle.render();
        let Ok(parsed) = parse_expr(&source, 3) else {
            mismatches += 1;
            continue;
        };
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            match (oracle.eval(&x), parsed.eval(&x)) {
                (Some(a), Ok(b)) if ulp_distance(a, b) <= 2 => compared += 1,
                (None, Err(_)) => both_failed += 1,
                _ => mismatches += 1,
            }
        }
    }

    panic::set_hook(Box::new(|_| {}));
    let (mut malformed, mut crashes, mut unstructured) = (0, 0, 0);
    for _ in 0..20_000 {
        let valid = random_expr(&mut rng, 3, 3).render();
        let text = garbage(&mut rng, &valid);
        match panic::catch_unwind(|| parse_expr(&text, 3)) {
            Err(_) => crashes += 1,
            Ok(Err(e)) => {
                malformed += 1;
                if e.offset > text.len() || e.to_string().is_empty() {
                    unstructured += 1;
                }
            }
            Ok(Ok(_)) => {}
        }
    }
    let _ = panic::take_hook();

    ensure(
        mismatches == 0 && crashes == 0 && unstructured == 0 && compared > 0,
        format!(
            "50 expressions x 100 points: {compared} agree within 2 ulp, {both_failed} domain errors on both sides, \
             {mismatches} mismatches; {malformed} malformed inputs, {crashes} crashes, {unstructured} unstructured errors"
        ),
    )
}

/// 10. Determinism of the machine report.
fn determinism() -> Outcome {
    let a = run_builtin_suite(None, 42)
        .map_err(|e| e.to_string())?
        .to_json();
    let b = run_builtin_suite(None, 42)
        .map_err(|e| e.to_string())?
        .to_json();
    ensure(
        a == b,
        format!(
            "two seed-42 suite reports, {} bytes each, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("transform range", transform_range),
        ("sign equivalences", sign_equivalences),
        ("penalty feasibility", penalty_feasibility),
        ("certificate soundness", certificate_soundness),
        ("1D level solve", one_dimensional_level),
        ("4D shifted-clipped sphere", four_dimensional_instance),
        ("global loop", global_loop),
        ("multiplicity growth", multiplicity_growth),
        ("parser oracle equivalence", parser_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
