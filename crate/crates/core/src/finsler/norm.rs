//! Norms on ℝⁿ and operator norms / co-norms between them.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::sampling;

/// Restarts used by the numeric operator-norm search.
pub const NORM_RESTARTS: usize = 32;

/// A norm on ℝⁿ (the norm of a tangent space at one point).
#[derive(Clone)]
pub enum Norm {
    Euclidean,
    /// `‖v‖ = |L v|₂` for an invertible `L`.
    Ellipsoidal(Mat),
    /// `‖v‖ = (Σ (wᵢ|vᵢ|)ᵖ)^{1/p}`, with `p = ∞` giving the weighted max norm.
    WeightedLp { weights: Vector, p: f64 },
    /// `‖v‖ = c · ‖v‖_inner`.
    Scaled(f64, Box<Norm>),
    Custom(Arc<dyn Fn(&Vector) -> f64 + Send + Sync>),
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Euclidean => write!(f, "Euclidean"),
            Norm::Ellipsoidal(l) => write!(f, "Ellipsoidal({l:?})"),
            Norm::WeightedLp { weights, p } => write!(f, "WeightedLp {{ weights: {:?}, p: {p} }}", weights.as_slice()),
            Norm::Scaled(c, n) => write!(f, "Scaled({c}, {n:?})"),
            Norm::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Unit-ball shape used to pick an exact operator-norm route.
enum Shape {
    /// `‖v‖ = |L v|₂`.
    Linear(Mat),
    /// Weighted ℓ¹ ball, vertices `±eᵢ/wᵢ`.
    L1(Vector),
    /// Weighted ℓ∞ ball, vertices `(±1/w₁, …, ±1/wₙ)`.
    LInf(Vector),
    Other,
}

impl Norm {
    pub fn weighted_lp(weights: Vector, p: f64) -> Self {
        Norm::WeightedLp { weights, p }
    }

    pub fn eval(&self, v: &Vector) -> f64 {
        match self {
            Norm::Euclidean => v.norm(),
            Norm::Ellipsoidal(l) => (l * v).norm(),
            Norm::WeightedLp { weights, p } => {
                if p.is_infinite() {
                    v.iter().zip(weights.iter()).map(|(x, w)| (w * x).abs()).fold(0.0, f64::max)
                } else if *p == 1.0 {
                    v.iter().zip(weights.iter()).map(|(x, w)| (w * x).abs()).sum()
                } else if *p == 2.0 {
                    v.iter().zip(weights.iter()).map(|(x, w)| (w * x).powi(2)).sum::<f64>().sqrt()
                } else {
                    // scale by the max to avoid overflow
                    let m = v.iter().zip(weights.iter()).map(|(x, w)| (w * x).abs()).fold(0.0, f64::max);
                    if m == 0.0 {
                        return 0.0;
                    }
                    m * v
                        .iter()
                        .zip(weights.iter())
                        .map(|(x, w)| ((w * x).abs() / m).powf(*p))
                        .sum::<f64>()
                        .powf(1.0 / p)
                }
            }
            Norm::Scaled(c, inner) => c * inner.eval(v),
            Norm::Custom(f) => f(v),
        }
    }

    /// `L` with `‖v‖ = |L v|₂`, when the norm is Euclidean-type.
    pub fn linear_factor(&self, dim: usize) -> Option<Mat> {
        match self.shape(dim) {
            Shape::Linear(l) => Some(l),
            _ => None,
        }
    }

    fn shape(&self, dim: usize) -> Shape {
        match self {
            Norm::Euclidean => Shape::Linear(Mat::identity(dim, dim)),
            Norm::Ellipsoidal(l) => Shape::Linear(l.clone()),
            Norm::WeightedLp { weights, p } if *p == 2.0 => Shape::Linear(Mat::from_diagonal(weights)),
            Norm::WeightedLp { weights, p } if *p == 1.0 => Shape::L1(weights.clone()),
            Norm::WeightedLp { weights, p } if p.is_infinite() && dim <= 12 => Shape::LInf(weights.clone()),
            Norm::Scaled(c, inner) => match inner.shape(dim) {
                Shape::Linear(l) => Shape::Linear(l * *c),
                Shape::L1(w) => Shape::L1(w * *c),
                Shape::LInf(w) => Shape::LInf(w * *c),
                Shape::Other => Shape::Other,
            },
            _ => Shape::Other,
        }
    }

    /// Sampled check of the norm axioms in dimension `dim`.
    pub fn check(&self, dim: usize, samples: usize, seed: u64) -> Result<()> {
        for i in 0..dim {
            let mut e = Vector::zeros(dim);
            e[i] = 1.0;
            if !(self.eval(&e) > 0.0) {
                return Err(Error::Validation(format!("norm vanishes on basis vector {i}")));
            }
        }
        if self.eval(&Vector::zeros(dim)) != 0.0 {
            return Err(Error::Validation("norm of the zero vector is not zero".into()));
        }
        let mut rng = sampling::seeded(seed);
        for _ in 0..samples {
            let u = sampling::unit_direction(&mut rng, dim) * rng.random_range(0.1..10.0);
            let v = sampling::unit_direction(&mut rng, dim) * rng.random_range(0.1..10.0);
            let t: f64 = rng.random_range(-5.0..5.0);
            let (nu, nv) = (self.eval(&u), self.eval(&v));
            if (self.eval(&(&u * t)) - t.abs() * nu).abs() > 1e-9 * (1.0 + t.abs() * nu) {
                return Err(Error::Validation("norm is not positively homogeneous".into()));
            }
            if self.eval(&(&u + &v)) > nu + nv + 1e-9 * (nu + nv) {
                return Err(Error::Validation("norm violates the triangle inequality".into()));
            }
        }
        Ok(())
    }
}

/// Direct search for the extremum of a scale-invariant ratio over directions.
fn pattern_search(dim: usize, mut ratio: impl FnMut(&Vector) -> f64, maximize: bool, seed: u64) -> f64 {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut rng = sampling::seeded(seed);
    let mut best_overall = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut starts: Vec<Vector> = (0..dim)
        .map(|i| {
            let mut e = Vector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    while starts.len() < NORM_RESTARTS.max(dim) {
        starts.push(sampling::unit_direction(&mut rng, dim));
    }
    for mut v in starts {
        let mut val = ratio(&v);
        let mut step = 0.5;
        let mut iters = 0;
        while step > 1e-13 && iters < 4000 {
            iters += 1;
            let mut improved = false;
            for i in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut w = v.clone();
                    w[i] += sign * step;
                    let r = ratio(&w);
                    if better(r, val) {
                        let len = w.norm();
                        v = w / len;
                        val = r;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if better(val, best_overall) {
            best_overall = val;
        }
    }
    best_overall
}

/// Operator norm `sup_{‖v‖_in = 1} ‖B v‖_out`.
pub fn operator_norm(b: &Mat, norm_in: &Norm, norm_out: &Norm) -> f64 {
    let (n, m) = b.shape();
    if let (Shape::Linear(lin), Shape::Linear(lout)) = (norm_in.shape(m), norm_out.shape(n)) {
        if let Ok(lin_inv) = linalg::inverse(&lin) {
            return linalg::sigma_max(&(lout * b * lin_inv));
        }
    }
    match norm_in.shape(m) {
        Shape::L1(w) => {
            return (0..m).map(|j| norm_out.eval(&b.column(j).into_owned()) / w[j]).fold(0.0, f64::max);
        }
        Shape::LInf(w) => {
            let mut best: f64 = 0.0;
            for mask in 0..(1usize << m) {
                let v = Vector::from_fn(m, |j, _| if mask & (1 << j) != 0 { 1.0 } else { -1.0 } / w[j]);
                best = best.max(norm_out.eval(&(b * v)));
            }
            return best;
        }
        _ => {}
    }
    pattern_search(m, |v| norm_out.eval(&(b * v)) / norm_in.eval(v), true, 0x5eed)
}

/// Co-norm `inf_{‖v‖_in = 1} ‖B v‖_out`.
pub fn co_norm(b: &Mat, norm_in: &Norm, norm_out: &Norm) -> f64 {
    let (n, m) = b.shape();
    if n < m {
        return 0.0;
    }
    if let (Shape::Linear(lin), Shape::Linear(lout)) = (norm_in.shape(m), norm_out.shape(n)) {
        if let Ok(lin_inv) = linalg::inverse(&lin) {
            return linalg::euclidean_conorm(&(lout * b * lin_inv));
        }
    }
    if n == m && matches!(norm_out.shape(n), Shape::L1(_) | Shape::LInf(_)) {
        // //B// = 1 / ‖B⁻¹‖ with the roles of the norms swapped; exact here
        // because the unit ball of `norm_out` is a polytope.
        return match linalg::inverse(b) {
            Ok(inv) => 1.0 / operator_norm(&inv, norm_out, norm_in),
            Err(_) => 0.0,
        };
    }
    if let Shape::Linear(lout) = norm_out.shape(n) {
        // The infimum of the convex `|L B v|` over the boundary of a
        // polytope ball is attained on some facet; each facet is the hull
        // of ball vertices, so its minimum is a minimum-norm-point problem.
        if let Some(facets) = polytope_facets(&norm_in.shape(m)) {
            let lb = lout * b;
            return facets
                .iter()
                .map(|verts| {
                    let images: Vec<Vector> = verts.iter().map(|v| &lb * v).collect();
                    linalg::min_norm_point(&images).0.norm()
                })
                .fold(f64::INFINITY, f64::min);
        }
    }
    pattern_search(m, |v| norm_out.eval(&(b * v)) / norm_in.eval(v), false, 0xc0de)
}

/// Facets of a weighted ℓ¹ or ℓ∞ unit ball, each listed by its vertices.
fn polytope_facets(shape: &Shape) -> Option<Vec<Vec<Vector>>> {
    match shape {
        Shape::L1(w) => {
            let m = w.len();
            Some(
                (0..(1usize << m))
                    .map(|mask| {
                        (0..m)
                            .map(|i| {
                                let sign = if mask & (1 << i) != 0 { -1.0 } else { 1.0 };
                                let mut v = Vector::zeros(m);
                                v[i] = sign / w[i];
                                v
                            })
                            .collect()
                    })
                    .collect(),
            )
        }
        Shape::LInf(w) => {
            let m = w.len();
            let mut facets = Vec::with_capacity(2 * m);
            for fixed in 0..m {
                for sign in [1.0, -1.0] {
                    let verts = (0..(1usize << m))
                        .filter(|mask| (mask >> fixed) & 1 == 0)
                        .map(|mask| {
                            Vector::from_fn(m, |j, _| {
                                let s = if j == fixed {
                                    sign
                                } else if mask & (1 << j) != 0 {
                                    -1.0
                                } else {
                                    1.0
                                };
                                s / w[j]
                            })
                        })
                        .collect();
                    facets.push(verts);
                }
            }
            Some(facets)
        }
        _ => None,
    }
}
