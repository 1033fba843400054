//! Calculus on matrix polytopes.

use rayon::prelude::*;

use crate::clarke::{expand_weights, HullElement, MatrixPolytope};
use crate::criteria::{Certificate, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::finsler::{co_norm, operator_norm, Norm};
use crate::linalg::{self, Mat, SINGULAR_DET};

/// `sup_{B ∈ P} |||B|||`: the max over generators, by convexity of the
/// operator norm.
pub fn polytope_norm(p: &MatrixPolytope, norm_in: &Norm, norm_out: &Norm) -> Result<f64> {
    Ok(p.generators()
        .par_iter()
        .map(|g| operator_norm(g, norm_in, norm_out))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max))
}

/// Grid estimate of `inf_{B ∈ P} //B//` with the minimizing hull element.
/// This is an upper bound on the set co-norm; see [`conorm_floor`] for a
/// certified lower companion.
pub fn polytope_conorm(p: &MatrixPolytope, norm_in: &Norm, norm_out: &Norm, grid: usize) -> (f64, HullElement) {
    let (reduced, idx) = p.reduced();
    let (weights, mats, _) = reduced.grid_elements(grid.max(1));
    let values: Vec<f64> = mats.par_iter().map(|m| co_norm(m, norm_in, norm_out)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    (
        values[best],
        HullElement {
            coefficients: expand_weights(&weights[best], &idx, p.len()),
        },
    )
}

/// Certified lower bound on the set co-norm: grid minimum minus the grid's
/// covering radius (the co-norm is 1-Lipschitz in the operator norm).
/// Zero when the grid is not exhaustive.
pub fn conorm_floor(p: &MatrixPolytope, norm_in: &Norm, norm_out: &Norm, grid: usize) -> f64 {
    let (reduced, _) = p.reduced();
    let (_, mats, sg) = reduced.grid_elements(grid.max(1));
    let cover = sg.covering_fraction();
    if !cover.is_finite() {
        return 0.0;
    }
    let min = mats
        .par_iter()
        .map(|m| co_norm(m, norm_in, norm_out))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let diam = reduced.diameter(|d| operator_norm(d, norm_in, norm_out));
    (min - cover * diam).max(0.0)
}

/// Determinant analysis of a square polytope over its barycentric grid.
#[derive(Debug, Clone)]
pub struct RankAnalysis {
    pub verdict: Verdict,
    pub min_abs_det: f64,
    /// `n R^{n−1}`: Lipschitz constant of det on the hull (spectral norm).
    pub det_lipschitz: f64,
    /// Covering radius of the grid in spectral norm.
    pub covering_radius: f64,
    pub grid_points: usize,
    pub exhaustive: bool,
    /// Weights (over the full generator list) of a singular or sign-flipped element.
    pub witness: Option<(Vec<f64>, Mat, f64)>,
}

pub(crate) fn analyze_rank(p: &MatrixPolytope, grid: usize) -> RankAnalysis {
    let (reduced, idx) = p.reduced();
    let n = p.shape().0;
    let (weights, mats, sg) = reduced.grid_elements(grid.max(1));
    let dets: Vec<f64> = mats.par_iter().map(linalg::det).collect();
    let r = reduced.generators().iter().map(linalg::sigma_max).fold(0.0, f64::max);
    let det_lipschitz = n as f64 * r.powi(n as i32 - 1);
    let diam = reduced.diameter(linalg::sigma_max);
    let covering_radius = sg.covering_fraction() * diam;
    let min_abs_det = dets.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    let full = |w: &[f64]| expand_weights(w, &idx, p.len());

    let mut witness = None;
    if let Some(i) = dets.iter().position(|d| d.abs() < SINGULAR_DET) {
        witness = Some((full(&weights[i]), mats[i].clone(), dets[i]));
    } else if let (Some(ip), Some(ineg)) = (dets.iter().position(|d| *d > 0.0), dets.iter().position(|d| *d < 0.0)) {
        // det changes sign on the segment between the two elements; bisect.
        let (mut a, mut b) = (weights[ip].clone(), weights[ineg].clone());
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect() };
        let mut w = mix(&a, &b);
        for _ in 0..200 {
            w = mix(&a, &b);
            let d = linalg::det(&reduced.element(&w));
            if d.abs() < SINGULAR_DET {
                break;
            }
            if d > 0.0 {
                a = w.clone();
            } else {
                b = w.clone();
            }
        }
        let m = reduced.element(&w);
        let d = linalg::det(&m);
        witness = Some((full(&w), m, d));
    }
    let verdict = if witness.is_some() {
        Verdict::Negative
    } else if sg.exhaustive && det_lipschitz * covering_radius < min_abs_det {
        Verdict::Positive
    } else {
        Verdict::Heuristic
    };
    RankAnalysis {
        verdict,
        min_abs_det,
        det_lipschitz,
        covering_radius,
        grid_points: mats.len(),
        exhaustive: sg.exhaustive,
        witness,
    }
}

/// Certificate that every element of the polytope is invertible.
///
/// Positive when all grid determinants share a sign and the Lipschitz bound
/// `|det A − det B| ≤ n R^{n−1} ‖A − B‖₂` times the grid's covering radius
/// stays below the smallest sampled `|det|`. Negative with a witness when a
/// sampled element is singular or two elements have opposite signs (the
/// witness is then located by bisection between them). Sampled polytopes
/// are inner approximations of ∂f(x), so their positive outcomes are
/// downgraded to heuristic.
pub fn certify_maximal_rank(p: &MatrixPolytope, grid: usize) -> Certificate {
    if !p.is_square() {
        return Certificate::new(Criterion::MaximalRank, Verdict::Inconclusive)
            .note("maximal rank is only assessed for square differentials");
    }
    let a = analyze_rank(p, grid);
    let mut verdict = a.verdict;
    let mut notes = Vec::new();
    if verdict == Verdict::Positive && !p.is_exact() {
        verdict = Verdict::Heuristic;
        notes.push("sampled polytope is an inner approximation of the differential".to_string());
    }
    if a.verdict == Verdict::Heuristic && !a.exhaustive {
        notes.push("non-exhaustive hull grid: determinant sign only sampled".to_string());
    }
    let certified = match verdict {
        Verdict::Positive => true,
        Verdict::Negative => p.is_exact(),
        _ => false,
    };
    let mut cert = Certificate::new(Criterion::MaximalRank, verdict)
        .certified(certified)
        .param("grid", grid)
        .param("generators", p.len())
        .evidence("min_abs_det", a.min_abs_det)
        .evidence("det_lipschitz", a.det_lipschitz)
        .evidence("covering_radius", a.covering_radius)
        .evidence("grid_points", a.grid_points as f64);
    cert.notes = notes;
    if let Some((w, m, d)) = a.witness {
        cert = cert.witness(
            Witness::new("singular hull element")
                .at(p.base_point())
                .weights(&w)
                .matrix(&m)
                .value(d),
        );
    }
    cert
}

/// Outer polytope for `co(∂f(x)⁻¹)`: inverses of the generators and of the
/// barycentric grid elements.
pub fn hull_of_inverses(p: &MatrixPolytope, grid: usize) -> Result<MatrixPolytope> {
    if !p.is_square() {
        return Err(Error::SingularElement);
    }
    let (reduced, _) = p.reduced();
    let (_, mats, _) = reduced.grid_elements(grid.max(1));
    let inverses = mats.par_iter().map(linalg::inverse).collect::<Result<Vec<_>>>()?;
    MatrixPolytope::exact(inverses, p.base_point().clone()).map(|q| MatrixPolytope { tag: p.tag(), ..q })
}

/// Whether every generator of `f_diff` lies within `tol` (Frobenius, plus
/// 1e-12 of rounding slack) of the hull of the products `C A` with `C`
/// from `g_diff` and `A` from `h_diff`.
pub fn chain_rule_check(
    h_diff: &MatrixPolytope,
    g_diff: &MatrixPolytope,
    f_diff: &MatrixPolytope,
    tol: f64,
) -> Result<bool> {
    let (hn, hm) = h_diff.shape();
    let (gn, gm) = g_diff.shape();
    if gm != hn {
        return Err(Error::DimensionMismatch {
            context: "chain rule composition",
            expected: hn,
            found: gm,
        });
    }
    if f_diff.shape() != (gn, hm) {
        return Err(Error::DimensionMismatch {
            context: "chain rule result",
            expected: gn * hm,
            found: f_diff.shape().0 * f_diff.shape().1,
        });
    }
    let products: Vec<Mat> = g_diff
        .generators()
        .iter()
        .flat_map(|c| h_diff.generators().iter().map(move |a| c * a))
        .collect();
    let scale = products.iter().map(|m| m.norm()).fold(1.0, f64::max);
    Ok(f_diff
        .generators()
        .par_iter()
        .all(|g| linalg::hull_distance(&products, g).0 <= tol + 1e-12 * scale))
}

/// Express a differential in other charts: each generator `A` becomes
/// `dψ⁻¹ · A · dφ`.
pub fn transport_through_charts(p: &MatrixPolytope, dphi: &Mat, dpsi_inv: &Mat) -> Result<MatrixPolytope> {
    let (n, m) = p.shape();
    if dphi.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            context: "source chart differential",
            expected: m,
            found: dphi.nrows(),
        });
    }
    if dpsi_inv.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "target chart differential",
            expected: n,
            found: dpsi_inv.nrows(),
        });
    }
    for c in [dphi, dpsi_inv] {
        let cond = linalg::condition_number(c);
        if !(cond <= 1e12) {
            return Err(Error::SingularChart { condition: cond });
        }
    }
    p.map_generators(|a| dpsi_inv * a * dphi)
}

/// Hausdorff distance between the hulls (Frobenius norm). The farthest
/// point of one hull from the other is attained at a generator.
pub fn hausdorff_distance(p: &MatrixPolytope, q: &MatrixPolytope) -> f64 {
    let one = |a: &MatrixPolytope, b: &MatrixPolytope| {
        a.generators()
            .iter()
            .map(|g| b.distance_to(g))
            .fold(0.0, f64::max)
    };
    one(p, q).max(one(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn shear_polytope() -> MatrixPolytope {
        MatrixPolytope::exact(
            vec![dmatrix![1.0, 1.0; 0.0, 1.0], dmatrix![1.0, -1.0; 0.0, 1.0]],
            dvector![0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn norms_of_simple_polytopes() {
        let e = Norm::Euclidean;
        let id = MatrixPolytope::singleton(Mat::identity(2, 2));
        assert_eq!(polytope_norm(&id, &e, &e).unwrap(), 1.0);
        let two = MatrixPolytope::exact(vec![Mat::identity(2, 2), Mat::identity(2, 2) * 2.0], dvector![0.0, 0.0]).unwrap();
        assert!((polytope_norm(&two, &e, &e).unwrap() - 2.0).abs() < 1e-15);
        let (c, w) = polytope_conorm(&id, &e, &e, 5);
        assert_eq!(c, 1.0);
        assert_eq!(w.coefficients, vec![1.0]);
    }

    #[test]
    fn abs_hull_contains_zero() {
        let p = MatrixPolytope::exact(vec![dmatrix![1.0], dmatrix![-1.0]], dvector![0.0]).unwrap();
        let (c, w) = polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, 3);
        assert_eq!(c, 0.0);
        assert_eq!(w.coefficients, vec![0.5, 0.5]);
        let cert = certify_maximal_rank(&p, 3);
        assert_eq!(cert.verdict, Verdict::Negative);
        assert_eq!(cert.witnesses[0].weights.as_deref(), Some(&[0.5, 0.5][..]));
    }

    #[test]
    fn shear_rank_and_inverses() {
        let p = shear_polytope();
        assert_eq!(certify_maximal_rank(&p, 11).verdict, Verdict::Positive);
        let inv = hull_of_inverses(&p, 11).unwrap();
        assert_eq!(inv.len(), 11);
        for s in [-1.0, -0.4, 0.0, 0.6, 1.0] {
            assert!(inv.contains(&dmatrix![1.0, -s; 0.0, 1.0], 1e-12));
        }
        let floor = conorm_floor(&p, &Norm::Euclidean, &Norm::Euclidean, 101);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(floor > 0.0 && floor <= 1.0 / phi);
    }

    #[test]
    fn scalar_inverse_hull() {
        let p = MatrixPolytope::singleton(dmatrix![2.0]);
        assert_eq!(hull_of_inverses(&p, 3).unwrap().generators(), &[dmatrix![0.5]]);
    }

    #[test]
    fn sign_change_located_by_bisection() {
        let p = MatrixPolytope::exact(vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![1.0, 0.0; 0.0, -3.0]], dvector![0.0, 0.0])
            .unwrap();
        let cert = certify_maximal_rank(&p, 2);
        assert_eq!(cert.verdict, Verdict::Negative);
        let w = cert.witnesses[0].weights.clone().unwrap();
        assert!((w[0] - 0.75).abs() < 1e-9, "{w:?}");
    }

    #[test]
    fn chain_rule_examples() {
        let a = dmatrix![1.0, 2.0; 0.0, 1.0];
        let c = dmatrix![3.0, 0.0; 1.0, 1.0];
        let h = MatrixPolytope::singleton(a.clone());
        let g = MatrixPolytope::singleton(c.clone());
        let f = MatrixPolytope::singleton(&c * &a);
        assert!(chain_rule_check(&h, &g, &f, 0.0).unwrap());

        let h = MatrixPolytope::exact(vec![dmatrix![1.0], dmatrix![-1.0]], dvector![0.0]).unwrap();
        let g = MatrixPolytope::singleton(dmatrix![2.0]);
        let f = MatrixPolytope::exact(vec![dmatrix![-2.0], dmatrix![2.0]], dvector![0.0]).unwrap();
        assert!(chain_rule_check(&h, &g, &f, 0.0).unwrap());
        let bad = MatrixPolytope::singleton(dmatrix![2.1]);
        assert!(!chain_rule_check(&h, &g, &bad, 0.01).unwrap());
    }

    #[test]
    fn chart_transport() {
        let p = shear_polytope();
        let same = transport_through_charts(&p, &Mat::identity(2, 2), &Mat::identity(2, 2)).unwrap();
        assert_eq!(same, p);
        let swap = dmatrix![0.0, 1.0; 1.0, 0.0];
        let t = transport_through_charts(&p, &swap, &Mat::identity(2, 2)).unwrap();
        assert_eq!(t.generators()[0], dmatrix![1.0, 1.0; 1.0, 0.0]);
        let s = MatrixPolytope::singleton(dmatrix![1.0, 2.0; 3.0, 4.0]);
        let d = transport_through_charts(&s, &(Mat::identity(2, 2) * 2.0), &Mat::identity(2, 2)).unwrap();
        assert_eq!(d.generators()[0], dmatrix![2.0, 4.0; 6.0, 8.0]);
        assert!(matches!(
            transport_through_charts(&p, &dmatrix![1.0, 1.0; 1.0, 1.0], &Mat::identity(2, 2)),
            Err(Error::SingularChart { .. })
        ));
    }
}
