//! Computing ∂f(x): exactly for piecewise-affine maps, by sampling a.e.
//! Jacobians for black-box maps.

use crate::clarke::{MatrixPolytope, PolytopeTag};
use crate::error::{Error, Result};
use crate::funcorpus::{LipschitzMap, Map, PwaMap, FACET_TOL};
use crate::linalg::Vector;
use crate::sampling;

/// Parameters for black-box differentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkeConfig {
    /// Sampling radius δ.
    pub delta: f64,
    /// Number N of Jacobians.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ClarkeConfig {
    fn default() -> Self {
        ClarkeConfig {
            delta: 1e-6,
            samples: 32,
            seed: 0,
        }
    }
}

/// `∂f(x)` of a piecewise-affine map: the hull of the active pieces' matrices.
pub fn clarke_exact(map: &PwaMap, x: &Vector) -> Result<MatrixPolytope> {
    let active = map.active_pieces(x, FACET_TOL)?;
    MatrixPolytope::exact(active.iter().map(|&i| map.pieces()[i].matrix.clone()).collect(), x.clone())
}

/// Inner approximation of `∂f(x)` from Jacobians at `samples` points drawn
/// uniformly from `B(x, δ)`; points where differentiation fails numerically
/// are redrawn (up to 4N draws).
pub fn clarke_sampled(map: &LipschitzMap, x: &Vector, delta: f64, samples: usize, seed: u64) -> Result<MatrixPolytope> {
    if !(delta > 0.0) {
        return Err(Error::invalid("sampling radius must be positive"));
    }
    if samples == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if x.len() != map.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "sampling center",
            expected: map.dim_in(),
            found: x.len(),
        });
    }
    let mut rng = sampling::seeded(seed);
    let mut jacobians = Vec::with_capacity(samples);
    let mut draws = 0;
    while jacobians.len() < samples && draws < 4 * samples {
        draws += 1;
        let y = sampling::uniform_in_ball(&mut rng, x, delta);
        if !map.in_domain(&y) {
            continue;
        }
        if let Some(j) = map.jacobian_at(&y) {
            jacobians.push(j);
        }
    }
    let required = samples.div_ceil(2);
    if jacobians.len() < required {
        return Err(Error::SamplingFailed {
            obtained: jacobians.len(),
            required,
        });
    }
    let count = jacobians.len();
    MatrixPolytope::new(jacobians, x.clone(), PolytopeTag::Sampled { radius: delta, count })
}

/// `∂f(x)` for either map class. Smooth black-box maps give `{df(x)}`
/// (exact with a Jacobian oracle; a single finite-difference Jacobian
/// otherwise).
pub fn clarke_at(map: &Map, x: &Vector, cfg: &ClarkeConfig) -> Result<MatrixPolytope> {
    match map {
        Map::Pwa(p) => clarke_exact(p, x),
        Map::Lipschitz(l) => {
            if !l.in_domain(x) {
                return Err(Error::PointOutsideDomain {
                    point: x.iter().copied().collect(),
                });
            }
            if l.is_smooth() {
                if let Some(j) = l.oracle_jacobian(x) {
                    return MatrixPolytope::exact(vec![j], x.clone());
                }
                return MatrixPolytope::new(
                    vec![l.fd_jacobian(x)],
                    x.clone(),
                    PolytopeTag::Sampled { radius: 0.0, count: 1 },
                );
            }
            clarke_sampled(l, x, cfg.delta, cfg.samples, cfg.seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcorpus::{AffinePiece, HalfSpace, Polyhedron};
    use nalgebra::{dmatrix, dvector};

    fn abs_pwa() -> PwaMap {
        PwaMap::new(
            vec![
                AffinePiece::new(
                    dmatrix![1.0],
                    dvector![0.0],
                    Polyhedron::new(1, vec![HalfSpace::new(dvector![-1.0], 0.0)]).unwrap(),
                )
                .unwrap(),
                AffinePiece::new(
                    dmatrix![-1.0],
                    dvector![0.0],
                    Polyhedron::new(1, vec![HalfSpace::new(dvector![1.0], 0.0)]).unwrap(),
                )
                .unwrap(),
            ],
            Polyhedron::whole(1),
        )
        .unwrap()
    }

    #[test]
    fn abs_exact_differential() {
        let p = clarke_exact(&abs_pwa(), &dvector![0.0]).unwrap();
        assert_eq!(p.generators(), &[dmatrix![1.0], dmatrix![-1.0]]);
        let q = clarke_exact(&abs_pwa(), &dvector![2.0]).unwrap();
        assert_eq!(q.generators(), &[dmatrix![1.0]]);
    }

    #[test]
    fn affine_map_single_generator() {
        let a = dmatrix![2.0, 1.0; 0.0, 3.0];
        let f = PwaMap::affine(a.clone(), dvector![1.0, 1.0]).unwrap();
        assert_eq!(clarke_exact(&f, &dvector![5.0, -3.0]).unwrap().generators(), &[a.clone()]);
        let g = LipschitzMap::new(2, 2, move |x| &a * x);
        let s = clarke_sampled(&g, &dvector![0.3, 0.2], 0.1, 20, 1).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.generators().iter().all(|m| (m - dmatrix![2.0, 1.0; 0.0, 3.0]).norm() < 1e-8));
    }

    #[test]
    fn sampled_abs_sees_both_slopes() {
        let f = LipschitzMap::new(1, 1, |x| x.map(f64::abs));
        let p = clarke_sampled(&f, &dvector![0.0], 0.1, 200, 9).unwrap();
        let vals: Vec<f64> = p.generators().iter().map(|m| m[(0, 0)]).collect();
        assert!(vals.iter().all(|v| (v.abs() - 1.0).abs() < 1e-8));
        assert!(vals.iter().any(|v| *v > 0.0) && vals.iter().any(|v| *v < 0.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = LipschitzMap::new(1, 1, |x| x.map(|t| 2.0 * t + t.sin()));
        let a = clarke_sampled(&f, &dvector![0.0], 0.1, 50, 4).unwrap();
        let b = clarke_sampled(&f, &dvector![0.0], 0.1, 50, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_failure_reported() {
        let f = LipschitzMap::new(1, 1, |x| x.map(|t| if t.fract().abs() < 0.5 { t } else { f64::NAN }));
        assert!(matches!(
            clarke_sampled(&f, &dvector![0.75], 0.1, 10, 0),
            Err(Error::SamplingFailed { .. })
        ));
    }
}
