//! Function model, corpus loading and spec-file round trips.

mod common;

use std::io::Write as _;

use common::{entry, neg_cross_formula, pwa, shear_formula, v};
use lipinv::error::Error;
use lipinv::funcorpus::{
    active_pieces, bundled_corpus, eval_pwa, load_corpus, parse_spec, serialize_entry, AffinePiece, LipschitzMap, Map,
    Polyhedron, PwaMap, FACET_TOL,
};
use lipinv::linalg::{Mat, Vector};
use lipinv::sampling;
use nalgebra::{dmatrix, dvector};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn identity_piece_evaluates_to_input() {
    let id = PwaMap::affine(Mat::identity(2, 2), Vector::zeros(2)).unwrap();
    assert_eq!(eval_pwa(&id, &dvector![3.0, -1.0]).unwrap(), dvector![3.0, -1.0]);
}

#[test]
fn shear_matches_hand_evaluation() {
    let f = pwa("shear_abs");
    let x = dvector![1.0, -2.0];
    assert_eq!(eval_pwa(&f, &x).unwrap(), shear_formula(&x));
    assert_eq!(eval_pwa(&f, &x).unwrap(), dvector![3.0, -2.0]);
}

#[test]
fn point_outside_every_cell_is_rejected() {
    let domain = Polyhedron::from_box(&dvector![-1.0, -1.0], &dvector![1.0, 1.0]).unwrap();
    let piece = AffinePiece::new(Mat::identity(2, 2), Vector::zeros(2), domain.clone()).unwrap();
    let f = PwaMap::new(vec![piece], domain).unwrap();
    assert!(matches!(eval_pwa(&f, &dvector![2.0, 0.0]), Err(Error::PointOutsideDomain { .. })));
    assert!(matches!(active_pieces(&f, &dvector![0.0, 5.0], 0.0), Err(Error::PointOutsideDomain { .. })));
}

#[test]
fn active_pieces_on_and_off_the_splitting_facet() {
    let f = pwa("shear_abs");
    let mut both = active_pieces(&f, &dvector![0.0, 0.0], 0.0).unwrap();
    both.sort();
    assert_eq!(both, vec![0, 1]);

    let upper = active_pieces(&f, &dvector![0.0, 5.0], 0.0).unwrap();
    assert_eq!(upper.len(), 1);
    assert_eq!(f.pieces()[upper[0]].matrix, dmatrix![1.0, 1.0; 0.0, 1.0]);

    let single = PwaMap::affine(dmatrix![2.0, 1.0; 0.0, 3.0], dvector![1.0, 1.0]).unwrap();
    assert_eq!(active_pieces(&single, &dvector![0.3, -7.0], FACET_TOL).unwrap(), vec![0]);
}

#[test]
fn bundled_corpus_contains_the_reference_maps() {
    let entries = bundled_corpus().unwrap();
    let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    for name in ["shear_abs", "exp1d", "twoxsin", "neg_cross"] {
        assert!(names.contains(&name), "missing {name} in {names:?}");
    }
    let probe = dvector![0.7, -1.9];
    assert_eq!(entry("shear_abs").map.eval(&probe).unwrap(), shear_formula(&probe));
    let nc = entry("neg_cross").map.eval(&probe).unwrap();
    assert!((nc - neg_cross_formula(&probe)).norm() < 1e-15);
    let e = entry("exp1d").map.eval(&dvector![1.5]).unwrap()[0];
    assert!((e - 1.5f64.exp()).abs() < 1e-15);
    let t = entry("twoxsin").map.eval(&dvector![1.5]).unwrap()[0];
    assert!((t - (3.0 + 1.5f64.sin())).abs() < 1e-15);
}

#[test]
fn bundled_designator_loads_the_bundled_set() {
    let a = load_corpus("bundled").unwrap();
    let b = bundled_corpus().unwrap();
    assert_eq!(a.len(), b.len());
}

#[test]
fn empty_file_is_a_parse_error() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.flush().unwrap();
    assert!(matches!(load_corpus(f.path()), Err(Error::Parse { .. })));
}

#[test]
fn wrong_known_inverse_fails_validation() {
    let text = r#"
[map]
name = "bad_inverse"
kind = "pwa"
dim = 1

[piece.0]
a = "2"
b = "0"

[inverse]
components = ["y0"]
check_lo = [-1]
check_hi = [1]
check_points = 5
"#;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    assert!(matches!(load_corpus(f.path()), Err(Error::Validation(_))));
    let good = text.replace("\"y0\"", "\"y0 / 2\"");
    assert!(parse_spec(&good).is_ok());
}

#[test]
fn corpus_directory_loads_every_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    for e in bundled_corpus().unwrap() {
        std::fs::write(dir.path().join(format!("{}.toml", e.name)), serialize_entry(&e).unwrap()).unwrap();
    }
    let loaded = load_corpus(dir.path()).unwrap();
    assert_eq!(loaded.len(), 4);
}

#[test]
fn serialization_round_trip_reproduces_every_piece() {
    for e in bundled_corpus().unwrap() {
        let text = serialize_entry(&e).unwrap();
        let back = parse_spec(&text).unwrap_or_else(|err| panic!("{}: {err}\n{text}", e.name));
        assert_eq!(back.name, e.name);
        assert_eq!(back.expected_verdicts, e.expected_verdicts);
        assert_eq!(back.settings, e.settings);
        match (&e.map, &back.map) {
            (Map::Pwa(a), Map::Pwa(b)) => {
                assert_eq!(a.pieces().len(), b.pieces().len());
                for (pa, pb) in a.pieces().iter().zip(b.pieces()) {
                    assert_eq!(pa.matrix, pb.matrix);
                    assert_eq!(pa.offset, pb.offset);
                    assert_eq!(pa.cell.halfspaces().len(), pb.cell.halfspaces().len());
                }
            }
            (Map::Lipschitz(a), Map::Lipschitz(b)) => {
                assert_eq!(a.source(), b.source());
                assert_eq!(a.lipschitz_bound(), b.lipschitz_bound());
                assert_eq!(a.is_smooth(), b.is_smooth());
            }
            _ => panic!("{}: map kind changed in round trip", e.name),
        }
    }
}

/// Points on each bounding hyperplane: both neighbouring pieces agree there.
#[test]
fn pieces_agree_on_shared_facets() {
    let mut rng = sampling::seeded(11);
    for name in ["shear_abs", "neg_cross"] {
        let f = pwa(name);
        let mut checked = 0;
        for h in f.hyperplanes() {
            for _ in 0..200 {
                let x = sampling::uniform_in_box(&mut rng, &dvector![-10.0, -10.0], &dvector![10.0, 10.0]);
                let on = &x + &h.normal * ((h.offset - h.normal.dot(&x)) / h.normal.norm_squared());
                let active = f.active_pieces(&on, FACET_TOL).unwrap();
                for &i in &active {
                    for &j in &active {
                        let gap = (f.pieces()[i].value(&on) - f.pieces()[j].value(&on)).norm();
                        assert!(gap <= 1e-12, "{name}: pieces {i},{j} differ by {gap} at {on:?}");
                    }
                }
                if active.len() > 1 {
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "{name}: only {checked} facet points");
    }
}

/// Largest singular value computed from `AᵀA` with a plain power iteration.
fn spectral_norm_power(a: &Mat) -> f64 {
    let ata = a.transpose() * a;
    let mut x = Vector::from_element(a.ncols(), 1.0);
    x[0] += 0.5;
    for _ in 0..500 {
        let y = &ata * &x;
        x = &y / y.norm();
    }
    (x.dot(&(&ata * &x)) / x.norm_squared()).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pwa_difference_quotients_respect_max_piece_norm(
        name in prop::sample::select(vec!["shear_abs", "neg_cross"]),
        x0 in -10.0f64..10.0, x1 in -10.0f64..10.0,
        d0 in -3.0f64..3.0, d1 in -3.0f64..3.0,
    ) {
        let f = pwa(name);
        let bound = f.pieces().iter().map(|p| spectral_norm_power(&p.matrix)).fold(0.0, f64::max);
        prop_assert!((bound - f.lipschitz_constant()).abs() < 1e-9);
        let x = dvector![x0, x1];
        let y = dvector![x0 + d0, x1 + d1];
        prop_assume!((&x - &y).norm() > 1e-9);
        let q = (f.eval(&x).unwrap() - f.eval(&y).unwrap()).norm() / (&x - &y).norm();
        prop_assert!(q <= bound + 1e-9, "quotient {} > {}", q, bound);
    }

    #[test]
    fn declared_bound_dominates_difference_quotients(x in -30.0f64..30.0, d in -5.0f64..5.0) {
        prop_assume!(d.abs() > 1e-9);
        let e = entry("twoxsin");
        let bound = e.map.lipschitz_bound().expect("declared bound");
        let fx = e.map.eval(&dvector![x]).unwrap()[0];
        let fy = e.map.eval(&dvector![x + d]).unwrap()[0];
        prop_assert!(((fx - fy) / d).abs() <= bound + 1e-9);
    }
}

#[test]
fn finite_differences_follow_the_documented_step() {
    let f = LipschitzMap::new(1, 1, |x: &Vector| dvector![x[0].powi(3)]);
    let mut rng = sampling::seeded(5);
    for _ in 0..20 {
        let x: f64 = rng.random_range(-3.0..3.0);
        let j = f.fd_jacobian(&v(&[x]))[(0, 0)];
        // central differences of x³ carry the error h² with h = 1e-6·max(1,|x|)
        let h = 1e-6 * x.abs().max(1.0);
        let expected = 3.0 * x * x + h * h;
        assert!((j - expected).abs() < 1e-8 * (1.0 + x * x), "{j} vs {expected}");
    }
}
