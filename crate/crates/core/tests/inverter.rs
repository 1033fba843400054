//! Local inversion, path lifting, injectivity probing and the
//! inverse-differential inclusion.

mod common;

use common::{bisect, entry, shear_minus, singular_values_2x2, PHI};
use lipinv::criteria::Verdict;
use lipinv::funcorpus::{bundled_corpus, LipschitzMap, Map, Polyhedron, PwaMap};
use lipinv::inverter::{
    injectivity_probe, inverse_differential_check, inverse_differential_report, lift_path, lift_path_with,
    lift_polyline, local_inverse_check, LiftOptions, LiftStatus,
};
use lipinv::linalg::{Mat, Vector};
use lipinv::region::Region;
use lipinv::sampling;
use nalgebra::{dmatrix, dvector};
use rand::Rng;

fn linear(a: Mat) -> Map {
    let n = a.nrows();
    Map::Pwa(PwaMap::affine(a, Vector::zeros(n)).unwrap())
}

fn abs_map() -> Map {
    Map::Lipschitz(LipschitzMap::new(1, 1, |x: &Vector| dvector![x[0].abs()]).with_lipschitz_bound(1.0))
}

fn cube(lo: f64, hi: f64, n: usize) -> Region {
    Region::cube(Vector::from_element(n, lo), Vector::from_element(n, hi)).unwrap()
}

#[test]
fn local_inverse_examples() {
    let shear = local_inverse_check(&entry("shear_abs").map, &dvector![0.0, 0.0], 41).unwrap();
    assert_eq!(shear.verdict, Verdict::Positive);
    assert!((shear.evidence["inverse_norm_bound"] - PHI).abs() < 1e-12);

    let abs = local_inverse_check(&abs_map(), &dvector![0.0], 41).unwrap();
    assert_eq!(abs.verdict, Verdict::Negative);

    let a = dmatrix![3.0, 1.0; -1.0, 2.0];
    let oracle = 1.0 / singular_values_2x2(&a).0;
    let affine = local_inverse_check(&linear(a), &dvector![5.0, 5.0], 41).unwrap();
    assert_eq!(affine.verdict, Verdict::Positive);
    assert!((affine.evidence["inverse_norm_bound"] - oracle).abs() < 1e-12);
}

#[test]
fn shear_lift_reaches_the_closed_form_preimage() {
    let r = lift_path(&entry("shear_abs").map, &dvector![0.0, 0.0], &dvector![3.0, -2.0], 1e-10, 1000).unwrap();
    assert_eq!(r.status, LiftStatus::Converged);
    assert!(r.residual <= 1e-10);
    // g(u, v) = (u − |v|, v)
    assert!((r.preimage_vector() - dvector![1.0, -2.0]).norm() < 1e-9);
}

#[test]
fn two_x_plus_sine_lift_matches_bisection() {
    let r = lift_path(&entry("twoxsin").map, &dvector![0.0], &dvector![10.0], 1e-10, 1000).unwrap();
    assert_eq!(r.status, LiftStatus::Converged);
    let oracle = bisect(|x| 2.0 * x + x.sin() - 10.0, 0.0, 10.0);
    assert!((r.preimage[0] - oracle).abs() <= 1e-8, "{} vs {oracle}", r.preimage[0]);
    assert!((2.0 * oracle + oracle.sin() - 10.0).abs() < 1e-12);
}

#[test]
fn exponential_lift_toward_a_negative_target_fails() {
    let r = lift_path(&entry("exp1d").map, &dvector![0.0], &dvector![-1.0], 1e-10, 1000).unwrap();
    assert_ne!(r.status, LiftStatus::Converged);
    assert!(matches!(r.status, LiftStatus::StalledAtRank | LiftStatus::MaxSteps | LiftStatus::LeftRegion));
    // the lift runs toward −∞ while γ(s) = 1 − 2s approaches 0; accepted
    // states keep γ(s) within the residual tolerance of the positive range
    let last = r.trace.last().expect("some accepted steps");
    assert!(1.0 - 2.0 * last.s >= -1e-10, "s = {}", last.s);
    assert!(last.x[0] < -10.0);
    assert!(r.trace.windows(2).all(|w| w[1].x[0] < w[0].x[0]));
    assert!(r.residual >= 1.0);
}

/// The bundled maps with positive global verdicts invert a grid of targets.
#[test]
fn lifts_round_trip_on_target_grids() {
    for e in bundled_corpus().unwrap() {
        let positive = e
            .expected_verdicts
            .iter()
            .any(|(c, v)| matches!(c.key(), "hadamard" | "spectral") && *v == Verdict::Positive);
        if !positive {
            continue;
        }
        let n = e.map.dim_in();
        let x0 = e.settings.center.clone();
        let targets: Vec<Vector> = if n == 1 {
            (0..100).map(|k| dvector![-20.0 + 40.0 * k as f64 / 99.0]).collect()
        } else {
            (0..100)
                .map(|k| dvector![-8.0 + 16.0 * (k % 10) as f64 / 9.0, -8.0 + 16.0 * (k / 10) as f64 / 9.0])
                .collect()
        };
        for y in targets {
            let r = lift_path(&e.map, &x0, &y, 1e-10, 1000).unwrap();
            assert!(r.converged(), "{} → {y:?}: {:?}", e.name, r.status);
            let res = (e.map.eval(&r.preimage_vector()).unwrap() - &y).norm();
            assert!(res <= 1e-8, "{}: residual {res}", e.name);
            if let Some(g) = &e.known_inverse {
                let truth = g.eval_raw(&y);
                assert!((r.preimage_vector() - truth).norm() <= 1e-6, "{}: known inverse mismatch", e.name);
            }
            if e.name == "twoxsin" {
                let oracle = bisect(|x| 2.0 * x + x.sin() - y[0], -25.0, 25.0);
                assert!((r.preimage[0] - oracle).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn lifts_along_different_paths_agree() {
    let opts = LiftOptions::default();
    let mut rng = sampling::seeded(23);
    for name in ["shear_abs", "neg_cross", "twoxsin"] {
        let e = entry(name);
        let n = e.map.dim_in();
        let x0 = e.settings.center.clone();
        for _ in 0..10 {
            let y = Vector::from_fn(n, |_, _| rng.random_range(-6.0..6.0));
            let detour = Vector::from_fn(n, |_, _| rng.random_range(-6.0..6.0));
            let direct = lift_polyline(&e.map, &x0, &[y.clone()], &opts).unwrap();
            let bent = lift_polyline(&e.map, &x0, &[detour, y.clone()], &opts).unwrap();
            assert!(direct.converged() && bent.converged(), "{name}");
            let gap = (direct.preimage_vector() - bent.preimage_vector()).norm();
            assert!(gap <= 1e-6, "{name}: lifts differ by {gap}");
        }
    }
}

#[test]
fn accepted_steps_respect_the_conorm_progress_bound() {
    let mut rng = sampling::seeded(27);
    for name in ["shear_abs", "neg_cross", "twoxsin"] {
        let e = entry(name);
        let n = e.map.dim_in();
        for _ in 0..10 {
            let y = Vector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
            let r = lift_path(&e.map, &e.settings.center, &y, 1e-10, 1000).unwrap();
            assert!(r.converged());
            for st in &r.trace {
                assert!(
                    st.dx_norm <= st.dgamma_norm / st.conorm_estimate * 1.5 + 1e-12,
                    "{name}: |Δx| {} vs |Δγ| {} / m̂ {}",
                    st.dx_norm,
                    st.dgamma_norm,
                    st.conorm_estimate
                );
                assert!(st.residual <= 1e-10 * y.norm().max(1.0));
            }
        }
    }
}

#[test]
fn preimages_of_shifted_maps_depend_linearly_on_the_shift() {
    for name in ["shear_abs", "neg_cross", "twoxsin"] {
        let e = entry(name);
        let n = e.map.dim_in();
        let y = Vector::from_element(n, 2.5);
        let x0 = e.settings.center.clone();
        let base = lift_path(&e.map, &x0, &y, 1e-12, 2000).unwrap();
        assert!(base.converged());
        let mut constant = None;
        for t in [1e-1, 1e-2, 1e-3] {
            let ft = e.map.shifted(t);
            let r = lift_path(&ft, &x0, &y, 1e-12, 2000).unwrap();
            assert!(r.converged(), "{name} t = {t}");
            let drift = (r.preimage_vector() - base.preimage_vector()).norm();
            let c = *constant.get_or_insert(drift / t);
            assert!(drift <= 2.0 * c * t + 1e-9, "{name} t = {t}: drift {drift} vs C = {c}");
        }
    }
}

#[test]
fn probe_examples() {
    let shifts: Vec<f64> = (1..=8).map(|k| 1.0 / k as f64).collect();
    let nc = injectivity_probe(&entry("neg_cross").map, &cube(-5.0, 5.0, 2), &shifts, 20_000, 1).unwrap();
    assert_eq!(nc.verdict, Verdict::Heuristic);
    assert_eq!(nc.evidence["collisions"], 0.0);

    let square = Map::Lipschitz(
        LipschitzMap::new(1, 1, |x: &Vector| dvector![x[0] * x[0]])
            .with_domain(Polyhedron::from_box(&dvector![-1.0], &dvector![1.0]).unwrap()),
    );
    let sq = injectivity_probe(&square, &cube(-1.0, 1.0, 1), &[0.0], 2_000, 1).unwrap();
    assert_eq!(sq.verdict, Verdict::Negative);
    let w = &sq.witnesses[0];
    let (a, b) = (w.point.as_ref().unwrap()[0], w.other_point.as_ref().unwrap()[0]);
    assert!((a + b).abs() < 1e-6 && (a - b).abs() > 1e-6, "pair ({a}, {b})");

    let id = injectivity_probe(&linear(Mat::identity(2, 2)), &cube(-2.0, 2.0, 2), &[0.5, 0.25, 0.125], 5_000, 1).unwrap();
    assert_eq!(id.verdict, Verdict::Heuristic);
}

#[test]
fn affine_inverse_differential_is_contained() {
    let a = dmatrix![2.0, 1.0; 0.0, 3.0];
    let f = linear(a.clone());
    assert!(inverse_differential_check(&f, &dvector![1.0, 1.0], 11, 1e-6).unwrap());
    let report = inverse_differential_report(&f, &dvector![1.0, 1.0], 11, 1e-6).unwrap();
    let inv = a.try_inverse().unwrap();
    assert!(report.estimated.iter().all(|g| (g - &inv).norm() < 1e-6));
}

#[test]
fn shear_inverse_jacobians_lie_in_the_hull_of_inverses() {
    let f = entry("shear_abs").map;
    let x = dvector![0.0, 0.0];
    assert!(inverse_differential_check(&f, &x, 41, 1e-6).unwrap());
    let report = inverse_differential_report(&f, &x, 41, 1e-6).unwrap();
    // g(u, v) = (u − |v|, v) has Jacobians [[1, ∓1], [0, 1]]
    for target in [shear_minus(), dmatrix![1.0, 1.0; 0.0, 1.0]] {
        assert!(report.estimated.iter().any(|g| (g - &target).norm() < 1e-6), "missing {target}");
    }
    assert!(report.measured_norm <= report.norm_bound + 1e-6);
}

#[test]
fn sub_noise_tolerance_is_rejected() {
    let f = entry("shear_abs").map;
    assert!(!inverse_differential_check(&f, &dvector![0.0, 0.0], 41, 1e-12).unwrap());
}

#[test]
fn lift_options_are_respected() {
    let opts = LiftOptions {
        max_steps: 2,
        initial_step: 1e-3,
        ..LiftOptions::default()
    };
    let r = lift_path_with(&entry("twoxsin").map, &dvector![0.0], &dvector![50.0], &opts).unwrap();
    assert_eq!(r.status, LiftStatus::MaxSteps);
    assert!(r.steps <= 2);
    let tsv = r.trace_tsv();
    assert!(tsv.starts_with("s\tx0\tresidual\tstep\tnewton\n"));
    assert_eq!(tsv.lines().count(), r.trace.len() + 1);
}
