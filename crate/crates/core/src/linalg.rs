//! Small dense linear-algebra helpers shared by the differential calculus,
//! the criteria and the inverter.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Matrices whose Frobenius distance is below this are treated as equal.
pub const DEDUP_TOL: f64 = 1e-12;

/// Determinants below this magnitude count as singular.
pub const SINGULAR_DET: f64 = 1e-12;

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Largest singular value, i.e. the Euclidean operator norm.
pub fn sigma_max(m: &Mat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Euclidean co-norm `inf_{|v|=1} |Mv|`.
///
/// Zero whenever `M` has more columns than rows (nontrivial kernel).
pub fn euclidean_conorm(m: &Mat) -> f64 {
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn det(m: &Mat) -> f64 {
    debug_assert!(m.is_square());
    m.determinant()
}

/// Inverse of a square matrix, rejecting numerically singular input.
pub fn inverse(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "matrix inverse",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let sv = singular_values(m);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) || hi / lo > 1e14 {
        return Err(Error::SingularElement);
    }
    m.clone().try_inverse().ok_or(Error::SingularElement)
}

/// Condition number `σ_max / σ_min` (infinite for singular input).
pub fn condition_number(m: &Mat) -> f64 {
    let sv = singular_values(m);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn frobenius_distance(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm()
}

/// Complex eigenvalues of a real square matrix.
pub fn eigenvalues(m: &Mat) -> Vec<Complex<f64>> {
    debug_assert!(m.is_square());
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![Complex::new(m[(0, 0)], 0.0)],
        _ => m.complex_eigenvalues().iter().copied().collect(),
    }
}

/// Condition number of a unit-column eigenvector matrix, used by the
/// Bauer-Fike perturbation bound. Infinite for defective matrices.
pub fn eigenvector_condition(m: &Mat, eigs: &[Complex<f64>]) -> f64 {
    let n = m.nrows();
    if n == 1 {
        return 1.0;
    }
    let mc: DMatrix<Complex<f64>> = m.map(|v| Complex::new(v, 0.0));
    let mut vecs = DMatrix::<Complex<f64>>::zeros(n, n);
    for (col, lambda) in eigs.iter().enumerate() {
        let shifted = &mc - DMatrix::<Complex<f64>>::identity(n, n) * *lambda;
        let svd = shifted.svd(false, true);
        let Some(v_t) = svd.v_t else {
            return f64::INFINITY;
        };
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let v = v_t.row(idx).adjoint();
        let norm = v.norm();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        vecs.set_column(col, &(v / Complex::new(norm, 0.0)));
    }
    let sv = vecs.svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 1e-300 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Bound on how far any eigenvalue of `A + E` can sit from the spectrum of
/// `A`, given `‖E‖₂ ≤ e`. Minimum of Bauer-Fike and Ostrowski-Elsner.
pub fn eigenvalue_perturbation_bound(a: &Mat, eigs: &[Complex<f64>], e: f64) -> f64 {
    if e == 0.0 {
        return 0.0;
    }
    let n = a.nrows() as f64;
    let norm_a = sigma_max(a);
    let oe = (2.0 * norm_a + e).powf(1.0 - 1.0 / n) * e.powf(1.0 / n);
    let bf = eigenvector_condition(a, eigs) * e;
    oe.min(bf)
}

/// Nearest point of the convex hull of `points` to the origin (Wolfe's
/// minimum-norm-point algorithm). Returns the point and convex weights.
pub fn min_norm_point(points: &[Vector]) -> (Vector, Vec<f64>) {
    assert!(!points.is_empty(), "min_norm_point needs at least one point");
    let k = points.len();
    let scale = points
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0, f64::max)
        .max(1e-300);
    let eps = 1e-13;

    let j0 = (0..k)
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .unwrap();
    let mut active = vec![j0];
    let mut lambda = vec![1.0];
    let mut x = points[j0].clone();

    let combine = |active: &[usize], w: &[f64]| -> Vector {
        let mut out = Vector::zeros(points[0].len());
        for (&i, &wi) in active.iter().zip(w) {
            out.axpy(wi, &points[i], 1.0);
        }
        out
    };

    for _ in 0..(20 * k + 200) {
        let (j, best) = (0..k)
            .map(|i| (i, x.dot(&points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - best <= eps * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);

        for _ in 0..(active.len() + 8) {
            let alpha = affine_min_norm(points, &active);
            if alpha.iter().all(|&a| a > eps) {
                lambda = alpha;
                x = combine(&active, &lambda);
                break;
            }
            let mut theta: f64 = 1.0;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= eps && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut keep_active = Vec::with_capacity(active.len());
            let mut keep_lambda = Vec::with_capacity(active.len());
            for (&i, &l) in active.iter().zip(&lambda) {
                if l > eps {
                    keep_active.push(i);
                    keep_lambda.push(l);
                }
            }
            if keep_active.is_empty() {
                // numerically everything vanished; restart from the best vertex
                keep_active.push(j);
                keep_lambda.push(1.0);
            }
            let total: f64 = keep_lambda.iter().sum();
            keep_lambda.iter_mut().for_each(|l| *l /= total);
            active = keep_active;
            lambda = keep_lambda;
            x = combine(&active, &lambda);
        }
    }

    let mut weights = vec![0.0; k];
    for (&i, &l) in active.iter().zip(&lambda) {
        weights[i] += l;
    }
    (x, weights)
}

/// Weights of the minimum-norm point of the affine hull of the selected
/// points.
fn affine_min_norm(points: &[Vector], active: &[usize]) -> Vec<f64> {
    let s = active.len();
    if s == 1 {
        return vec![1.0];
    }
    let mut kkt = Mat::zeros(s + 1, s + 1);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate() {
            kkt[(a, b)] = points[i].dot(&points[j]);
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
    }
    let mut rhs = Vector::zeros(s + 1);
    rhs[s] = 1.0;
    let sol = match kkt.clone().lu().solve(&rhs) {
        Some(sol) if sol.iter().all(|v| v.is_finite()) => sol,
        _ => kkt
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| Vector::from_element(s + 1, 1.0 / s as f64)),
    };
    sol.rows(0, s).iter().copied().collect()
}

/// Frobenius distance from `target` to the convex hull of `generators`,
/// with the minimizing convex weights.
pub fn hull_distance(generators: &[Mat], target: &Mat) -> (f64, Vec<f64>) {
    let pts: Vec<Vector> = generators
        .iter()
        .map(|g| Vector::from_iterator(g.len(), (g - target).iter().copied()))
        .collect();
    let (x, w) = min_norm_point(&pts);
    (x.norm(), w)
}

/// Barycentric sample of the probability simplex on `k` vertices.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    pub weights: Vec<Vec<f64>>,
    /// True when the grid contains every composition at `divisions`
    /// resolution, so every simplex point is within the covering bound.
    pub exhaustive: bool,
    pub divisions: usize,
}

impl SimplexGrid {
    /// Upper bound on the mass that must move (half the ℓ1 distance) to
    /// reach the nearest grid point from any point of the simplex.
    /// Multiplied by the generator diameter this bounds ‖B − B_grid‖.
    pub fn covering_fraction(&self) -> f64 {
        let k = self.weights.first().map_or(1, |w| w.len());
        if k <= 1 {
            0.0
        } else if self.exhaustive {
            k as f64 / (2.0 * self.divisions as f64)
        } else {
            f64::INFINITY
        }
    }
}

/// Exhaustive compositions of `grid − 1` into `k` parts for `k ≤ 4`;
/// otherwise the vertices plus `grid³` quasi-random simplex points.
pub fn simplex_grid(k: usize, grid: usize) -> SimplexGrid {
    assert!(k >= 1);
    let divisions = grid.saturating_sub(1).max(1);
    if k == 1 {
        return SimplexGrid {
            weights: vec![vec![1.0]],
            exhaustive: true,
            divisions,
        };
    }
    if k <= 4 {
        let mut out = Vec::new();
        let mut current = vec![0usize; k];
        compositions(divisions, 0, &mut current, &mut out);
        let weights = out
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as f64 / divisions as f64).collect())
            .collect();
        return SimplexGrid {
            weights,
            exhaustive: true,
            divisions,
        };
    }
    let count = grid.saturating_pow(3).max(1);
    let mut weights: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut w = vec![0.0; k];
            w[i] = 1.0;
            w
        })
        .collect();
    let alphas = kronecker_alphas(k - 1);
    for idx in 1..=count {
        let mut u: Vec<f64> = alphas
            .iter()
            .map(|a| (0.5 + idx as f64 * a).fract())
            .collect();
        u.sort_by(f64::total_cmp);
        let mut w = Vec::with_capacity(k);
        let mut prev = 0.0;
        for v in u {
            w.push(v - prev);
            prev = v;
        }
        w.push(1.0 - prev);
        weights.push(w);
    }
    SimplexGrid {
        weights,
        exhaustive: false,
        divisions,
    }
}

fn compositions(remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let k = current.len();
    if pos == k - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        compositions(remaining - v, pos + 1, current, out);
    }
}

/// Additive-recurrence (R_d) low-discrepancy increments.
fn kronecker_alphas(d: usize) -> Vec<f64> {
    // phi_d is the unique positive root of x^(d+1) = x + 1
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|i| (1.0 / phi.powi(i as i32)).fract()).collect()
}

/// Least-norm solution of the underdetermined system `A x = c` closest to
/// `anchor`, i.e. the projection of `anchor` onto the affine subspace.
pub fn project_onto_affine(rows: &[Vector], offsets: &[f64], anchor: &Vector) -> Option<Vector> {
    if rows.is_empty() {
        return Some(anchor.clone());
    }
    let n = anchor.len();
    let mut a = Mat::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        a.set_row(i, &r.transpose());
    }
    let c = Vector::from_column_slice(offsets);
    let residual = &c - &a * anchor;
    let gram = &a * a.transpose();
    if condition_number(&gram) > 1e12 {
        return None;
    }
    let y = gram.lu().solve(&residual)?;
    Some(anchor + a.transpose() * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn golden_ratio_singular_values() {
        let m = dmatrix![1.0, 1.0; 0.0, 1.0];
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sigma_max(&m) - phi).abs() < 1e-14);
        assert!((euclidean_conorm(&m) - 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn wide_matrix_has_zero_conorm() {
        let m = dmatrix![1.0, 2.0];
        assert_eq!(euclidean_conorm(&m), 0.0);
    }

    #[test]
    fn schur_eigenvalues_of_small_matrices() {
        let m = dmatrix![-1.0, -0.3; 0.3, -1.0];
        let e = eigenvalues(&m);
        assert!((e[0].re + 1.0).abs() < 1e-14 && (e[0].im.abs() - 0.3).abs() < 1e-14);
        let m3 = dmatrix![2.0, 1.0, 0.0; 0.0, 3.0, 0.0; 0.0, 0.0, -1.0];
        let mut e3: Vec<f64> = eigenvalues(&m3).iter().map(|c| c.re).collect();
        e3.sort_by(f64::total_cmp);
        assert!((e3[0] + 1.0).abs() < 1e-12 && (e3[1] - 2.0).abs() < 1e-12 && (e3[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn defective_matrix_has_infinite_eigenvector_condition() {
        let m = dmatrix![1.0, 1.0; 0.0, 1.0];
        let e = eigenvalues(&m);
        assert!(eigenvector_condition(&m, &e) > 1e6);
        let d = dmatrix![2.0, 0.0; 0.0, 3.0];
        let e = eigenvalues(&d);
        assert!((eigenvector_condition(&d, &e) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_norm_point_of_segment_crossing_origin() {
        let pts = vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![-1.0, 1.0])];
        let (x, w) = min_norm_point(&pts);
        assert!((x[0]).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_norm_point_inside_triangle_is_origin() {
        let pts = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![-1.0, 1.0]),
            DVector::from_vec(vec![-1.0, -1.0]),
        ];
        let (x, w) = min_norm_point(&pts);
        assert!(x.norm() < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compositions_count() {
        // C(N + k - 1, k - 1)
        assert_eq!(simplex_grid(2, 11).weights.len(), 11);
        assert_eq!(simplex_grid(3, 5).weights.len(), 15);
        assert_eq!(simplex_grid(4, 3).weights.len(), 10);
        let g = simplex_grid(6, 3);
        assert!(!g.exhaustive);
        assert_eq!(g.weights.len(), 6 + 27);
        for w in &g.weights {
            assert!(w.iter().all(|&v| v >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_projection() {
        let rows = vec![DVector::from_vec(vec![0.0, 1.0])];
        let p = project_onto_affine(&rows, &[2.0], &DVector::from_vec(vec![3.0, -1.0])).unwrap();
        assert_eq!(p, DVector::from_vec(vec![3.0, 2.0]));
    }
}
