//! Clarke generalized differentials: exact for piecewise-affine maps,
//! sampled for black-box maps, and the calculus of matrix polytopes
//! (norms, co-norms, rank certificates, inverses, chain rule, charts).

mod calculus;
mod compute;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, SimplexGrid, Vector, DEDUP_TOL};

pub use calculus::{
    certify_maximal_rank, chain_rule_check, conorm_floor, hausdorff_distance, hull_of_inverses, polytope_conorm,
    polytope_norm, transport_through_charts, RankAnalysis,
};
pub(crate) use calculus::analyze_rank;
pub use compute::{clarke_at, clarke_exact, clarke_sampled, ClarkeConfig};

/// How a polytope was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolytopeTag {
    /// Equals ∂f(x).
    Exact,
    /// Inner approximation from `count` a.e. Jacobians in `B(x, radius)`.
    Sampled { radius: f64, count: usize },
}

/// Convex weights over a polytope's generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullElement {
    pub coefficients: Vec<f64>,
}

impl HullElement {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let sum: f64 = coefficients.iter().sum();
        if coefficients.is_empty() || coefficients.iter().any(|c| *c < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("hull weights must be nonnegative and sum to 1"));
        }
        Ok(HullElement { coefficients })
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut c = vec![0.0; k];
        c[i] = 1.0;
        HullElement { coefficients: c }
    }
}

/// V-representation of a convex compact set of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolytope {
    generators: Vec<Mat>,
    base_point: Vector,
    tag: PolytopeTag,
}

impl MatrixPolytope {
    /// Exact polytopes merge generators closer than 1e-12 (Frobenius);
    /// sampled ones keep every sample.
    pub fn new(generators: Vec<Mat>, base_point: Vector, tag: PolytopeTag) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::invalid("a matrix polytope needs at least one generator"))?;
        let shape = first.shape();
        if let Some(g) = generators.iter().find(|g| g.shape() != shape) {
            return Err(Error::DimensionMismatch {
                context: "polytope generators",
                expected: shape.0 * shape.1,
                found: g.len(),
            });
        }
        let generators = match tag {
            PolytopeTag::Exact => dedup(generators),
            PolytopeTag::Sampled { .. } => generators,
        };
        Ok(MatrixPolytope {
            generators,
            base_point,
            tag,
        })
    }

    pub fn exact(generators: Vec<Mat>, base_point: Vector) -> Result<Self> {
        MatrixPolytope::new(generators, base_point, PolytopeTag::Exact)
    }

    /// Polytope with a single generator at the origin of its domain.
    pub fn singleton(m: Mat) -> Self {
        let base = Vector::zeros(m.ncols());
        MatrixPolytope {
            generators: vec![m],
            base_point: base,
            tag: PolytopeTag::Exact,
        }
    }

    pub fn generators(&self) -> &[Mat] {
        &self.generators
    }

    pub fn base_point(&self) -> &Vector {
        &self.base_point
    }

    pub fn tag(&self) -> PolytopeTag {
        self.tag
    }

    pub fn is_exact(&self) -> bool {
        self.tag == PolytopeTag::Exact
    }

    pub fn shape(&self) -> (usize, usize) {
        self.generators[0].shape()
    }

    pub fn is_square(&self) -> bool {
        let (n, m) = self.shape();
        n == m
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `Σ λᵢ Gᵢ`.
    pub fn element(&self, weights: &[f64]) -> Mat {
        let (n, m) = self.shape();
        let mut out = Mat::zeros(n, m);
        for (g, w) in self.generators.iter().zip(weights) {
            if *w != 0.0 {
                out += g * *w;
            }
        }
        out
    }

    /// Frobenius distance from `m` to the hull.
    pub fn distance_to(&self, m: &Mat) -> f64 {
        linalg::hull_distance(&self.generators, m).0
    }

    pub fn contains(&self, m: &Mat, tol: f64) -> bool {
        self.distance_to(m) <= tol
    }

    /// Indices of generators that are extreme points: duplicates removed,
    /// and for scalar polytopes only the min and max survive; otherwise
    /// generators lying in the hull of the others are dropped (up to 64).
    pub fn extreme_indices(&self) -> Vec<usize> {
        let mut keep: Vec<usize> = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            if !keep.iter().any(|&j| linalg::frobenius_distance(&self.generators[j], g) < DEDUP_TOL) {
                keep.push(i);
            }
        }
        if self.shape() == (1, 1) {
            let val = |i: &usize| self.generators[*i][(0, 0)];
            let lo = *keep.iter().min_by(|a, b| val(a).total_cmp(&val(b))).expect("nonempty");
            let hi = *keep.iter().max_by(|a, b| val(a).total_cmp(&val(b))).expect("nonempty");
            return if lo == hi { vec![lo] } else { vec![lo.min(hi), lo.max(hi)] };
        }
        if keep.len() > 2 && keep.len() <= 64 {
            let mut i = 0;
            while i < keep.len() && keep.len() > 1 {
                let others: Vec<Mat> = keep
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, &j)| self.generators[j].clone())
                    .collect();
                if linalg::hull_distance(&others, &self.generators[keep[i]]).0 < 1e-12 {
                    keep.remove(i);
                } else {
                    i += 1;
                }
            }
        }
        keep
    }

    /// Polytope on the extreme generators only (same hull).
    pub fn reduced(&self) -> (MatrixPolytope, Vec<usize>) {
        let idx = self.extreme_indices();
        let p = MatrixPolytope {
            generators: idx.iter().map(|&i| self.generators[i].clone()).collect(),
            base_point: self.base_point.clone(),
            tag: self.tag,
        };
        (p, idx)
    }

    /// Barycentric grid of hull elements: weights, matrices and the grid.
    pub fn grid_elements(&self, grid: usize) -> (Vec<Vec<f64>>, Vec<Mat>, SimplexGrid) {
        let sg = linalg::simplex_grid(self.generators.len(), grid);
        let mats = sg.weights.iter().map(|w| self.element(w)).collect();
        (sg.weights.clone(), mats, sg)
    }

    /// Largest pairwise generator distance in the given matrix norm.
    pub fn diameter(&self, norm: impl Fn(&Mat) -> f64) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.generators.len() {
            for j in i + 1..self.generators.len() {
                d = d.max(norm(&(&self.generators[i] - &self.generators[j])));
            }
        }
        d
    }

    pub fn map_generators(&self, f: impl Fn(&Mat) -> Mat) -> Result<MatrixPolytope> {
        MatrixPolytope::new(self.generators.iter().map(f).collect(), self.base_point.clone(), self.tag)
    }

    pub fn with_base_point(mut self, x: Vector) -> Self {
        self.base_point = x;
        self
    }
}

fn dedup(generators: Vec<Mat>) -> Vec<Mat> {
    let mut out: Vec<Mat> = Vec::with_capacity(generators.len());
    for g in generators {
        if !out.iter().any(|o| linalg::frobenius_distance(o, &g) < DEDUP_TOL) {
            out.push(g);
        }
    }
    out
}

/// Expand weights over a reduced generator list back to the full list.
pub(crate) fn expand_weights(weights: &[f64], idx: &[usize], k: usize) -> Vec<f64> {
    let mut full = vec![0.0; k];
    for (w, &i) in weights.iter().zip(idx) {
        full[i] += w;
    }
    full
}
