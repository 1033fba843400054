//! Helpers and independent oracles shared by the integration suites.

#![allow(dead_code)]

use lipinv::funcorpus::{bundled_corpus, CorpusEntry, PwaMap};
use lipinv::linalg::{Mat, Vector};
use nalgebra::dmatrix;

pub const PHI: f64 = 1.618_033_988_749_894_8;

pub fn entry(name: &str) -> CorpusEntry {
    bundled_corpus()
        .expect("bundled corpus loads")
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("missing corpus entry {name}"))
}

pub fn pwa(name: &str) -> PwaMap {
    entry(name).map.as_pwa().expect("piecewise-affine entry").clone()
}

pub fn shear_plus() -> Mat {
    dmatrix![1.0, 1.0; 0.0, 1.0]
}

pub fn shear_minus() -> Mat {
    dmatrix![1.0, -1.0; 0.0, 1.0]
}

/// Hand formula `(x + |y|, y)`.
pub fn shear_formula(x: &Vector) -> Vector {
    Vector::from_vec(vec![x[0] + x[1].abs(), x[1]])
}

/// Hand formula `(−x + 0.3|y|, −y + 0.3|x|)`.
pub fn neg_cross_formula(x: &Vector) -> Vector {
    Vector::from_vec(vec![-x[0] + 0.3 * x[1].abs(), -x[1] + 0.3 * x[0].abs()])
}

/// Root of a monotone scalar function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "bracket does not straddle a root");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Singular values of a 2×2 matrix from the characteristic polynomial of
/// `AᵀA`, with no decomposition.
pub fn singular_values_2x2(m: &Mat) -> (f64, f64) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = (tr * tr - 4.0 * det * det).max(0.0).sqrt();
    let hi = ((tr + disc) / 2.0).sqrt();
    let lo = if hi > 0.0 { det / hi } else { 0.0 };
    (lo, hi)
}

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues_2x2(m: &Mat) -> [(f64, f64); 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(tr / 2.0 + r, 0.0), (tr / 2.0 - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, r), (tr / 2.0, -r)]
    }
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}
