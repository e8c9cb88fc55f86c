use proptest::prelude::*;
use sinegate_core::{
    multistart_minimize, nelder_mead_minimize, AugmentedObjective, BoxDomain, Error, Point, Result,
    SolverConfig,
};

fn quartic(x: &[f64]) -> Result<f64> {
    let t = x[0];
    Ok((t * t - 1.0).powi(2) + (t - 1.0).powi(2) / 100.0)
}

#[test]
fn squared_distance_from_3_4() {
    let r = nelder_mead_minimize(
        |x| Ok(x[0] * x[0] + x[1] * x[1]),
        &[3.0, 4.0],
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(
        r.minimizer.iter().all(|v| v.abs() < 1e-6),
        "{:?}",
        r.minimizer
    );
    assert!(r.value < 1e-10);
    assert!(r.converged);
}

#[test]
fn anchor_only_objective_reaches_centre_and_rho() {
    let domain = BoxDomain::cube(1, -1.5, 1.5).unwrap();
    let zero = |_: &Point| -> Result<f64> { Ok(0.0) };
    let aug = AugmentedObjective::new(zero, domain, 2.0, true).unwrap();
    let r = nelder_mead_minimize(
        |z| aug.search_value(z),
        &[-1.5, 0.3f64.ln()],
        &SolverConfig::default(),
    )
    .unwrap();
    let p = aug.decode(&r.minimizer).unwrap();
    assert!(p.x.coords()[0].abs() < 1e-4, "{}", p.x);
    assert!((p.r.values()[0] - 2.0).abs() < 1e-4, "{:?}", p.r);
}

#[test]
fn quartic_matches_grid_oracle() {
    let (lo, hi, n) = (-3.0, 3.0, 1_000_000usize);
    let (mut best_x, mut best_f) = (f64::NAN, f64::INFINITY);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let f = quartic(&[x]).unwrap();
        if f < best_f {
            (best_x, best_f) = (x, f);
        }
    }
    let r = nelder_mead_minimize(quartic, &[2.0], &SolverConfig::default()).unwrap();
    let spacing = (hi - lo) / (n - 1) as f64;
    assert!(
        (r.minimizer[0] - best_x).abs() <= spacing,
        "{} vs {best_x}",
        r.minimizer[0]
    );
    assert!(r.value <= best_f + 1e-12);
    assert!((r.minimizer[0] - 1.0).abs() < 1e-4);
}

#[test]
fn never_worse_than_start() {
    let f = |x: &[f64]| Ok((3.0 * x[0]).sin() + (2.0 * x[1]).cos() + 0.01 * x[0] * x[1]);
    for init in [[0.0, 0.0], [1.0, -2.0], [5.0, 3.0]] {
        let r = nelder_mead_minimize(f, &init, &SolverConfig::default()).unwrap();
        assert!(r.value <= f(&init).unwrap());
    }
}

#[test]
fn nan_aborts_and_bad_init_is_rejected() {
    let nan_far = |x: &[f64]| {
        Ok(if x[0] < -0.5 {
            f64::NAN
        } else {
            (x[0] + 1.0).powi(2)
        })
    };
    assert!(nelder_mead_minimize(nan_far, &[0.0], &SolverConfig::default()).is_err());
    assert!(nelder_mead_minimize(|_| Ok(f64::INFINITY), &[0.0], &SolverConfig::default()).is_err());
}

#[test]
fn trace_is_monotone_and_deterministic() {
    let config = SolverConfig {
        record_trace: true,
        ..Default::default()
    };
    let rosen = |x: &[f64]| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let a = nelder_mead_minimize(rosen, &[-1.2, 1.0], &config).unwrap();
    let b = nelder_mead_minimize(rosen, &[-1.2, 1.0], &config).unwrap();
    let trace = a.trace.as_ref().unwrap();
    assert_eq!(trace.len(), a.iters + 1);
    assert!(trace.windows(2).all(|w| w[1].value <= w[0].value));
    assert_eq!(a, b);
    for (p, q) in trace.iter().zip(b.trace.as_ref().unwrap()) {
        assert_eq!(p.value.to_bits(), q.value.to_bits());
    }
}

fn double_well(x: &[f64]) -> Result<f64> {
    // shallow basin near -1 (depth -1), deep basin near 2 (depth -3)
    let t = x[0];
    Ok(-(-(t + 1.0).powi(2) * 4.0).exp() - 3.0 * (-(t - 2.0).powi(2) * 4.0).exp())
}

#[test]
fn multistart_prefers_deeper_basin() {
    let starts = vec![vec![-1.2], vec![2.3]];
    let r = multistart_minimize(double_well, &starts, &SolverConfig::default()).unwrap();
    assert_eq!(r.best_index, 1);
    assert!((r.best.minimizer[0] - 2.0).abs() < 1e-3);
    assert!(r.best.value < -2.99);

    let single = multistart_minimize(double_well, &starts[..1], &SolverConfig::default()).unwrap();
    let direct = nelder_mead_minimize(double_well, &starts[0], &SolverConfig::default()).unwrap();
    assert_eq!(single.best, direct);
}

#[test]
fn multistart_skips_and_reports_failures() {
    let f = |x: &[f64]| Ok(if x[0] > 10.0 { f64::NAN } else { x[0] * x[0] });
    let starts = vec![vec![20.0], vec![1.0], vec![30.0]];
    let r = multistart_minimize(f, &starts, &SolverConfig::default()).unwrap();
    assert_eq!(r.best_index, 1);
    assert_eq!(
        r.failures.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
        vec![0, 2]
    );

    match multistart_minimize(|_| Ok(f64::NAN), &starts, &SolverConfig::default()) {
        Err(Error::AllStartsFailed(failed)) => assert_eq!(failed.len(), 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        multistart_minimize(f, &[], &SolverConfig::default()),
        Err(Error::NoStarts)
    ));
}

fn convex_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(0.5..5.0f64, n),
            prop::collection::vec(-2.0..2.0f64, n),
            -0.4..0.4f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strictly_convex_quadratics((centre, diag, init, coupling) in convex_case()) {
        // diag + coupling between neighbours stays diagonally dominant, hence positive definite
        let n = centre.len();
        let c = centre.clone();
        let f = move |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            let mut s: f64 = d.iter().zip(&diag).map(|(v, w)| w * v * v).sum();
            for i in 1..n {
                s += coupling * d[i - 1] * d[i];
            }
            Ok(s)
        };
        let r = nelder_mead_minimize(f, &init, &SolverConfig::default()).unwrap();
        prop_assert!(r.converged);
        for (m, c) in r.minimizer.iter().zip(&centre) {
            prop_assert!((m - c).abs() < 1e-4, "{:?} vs {:?}", r.minimizer, centre);
        }
    }
}
