//! Closed-form and brute-force oracles, written without the library's
//! linear algebra, used to check its results.

/// Smallest singular value of a 2×2 matrix `[[a, b], [c, d]]` from the
/// eigenvalues of `MᵀM`.
pub fn sigma_min_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    ((t - disc) / 2.0).max(0.0).sqrt()
}

/// Largest singular value of a 2×2 matrix.
pub fn sigma_max_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    ((t + disc) / 2.0).sqrt()
}

/// `min_{s ∈ [−1, 1]} σ_min([[1, s], [0, 1]])` by an `n`-point scan.
pub fn shear_conorm_scan(n: usize) -> f64 {
    (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .map(|s| sigma_min_2x2(1.0, s, 0.0, 1.0))
        .fold(f64::INFINITY, f64::min)
}

/// Root of a continuous `f` with a sign change on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on the bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues of the symmetric matrix `[[d, o], [o, d]]`, ascending.
pub fn symmetric_2x2_eigenvalues(d: f64, o: f64) -> (f64, f64) {
    (d - o.abs(), d + o.abs())
}

/// Eigenvalues of a general 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> [(f64, f64); 2] {
    let half_tr = 0.5 * (a + d);
    let disc = half_tr * half_tr - (a * d - b * c);
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(half_tr - r, 0.0), (half_tr + r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(half_tr, -r), (half_tr, r)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sigma_max_2x2(1.0, 1.0, 0.0, 1.0) - phi).abs() < 1e-15);
        assert!((sigma_min_2x2(1.0, 1.0, 0.0, 1.0) - 1.0 / phi).abs() < 1e-15);
        assert!((shear_conorm_scan(1001) - 1.0 / phi).abs() < 1e-15);
    }

    #[test]
    fn bisection() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_spectra() {
        let (lo, hi) = symmetric_2x2_eigenvalues(-1.0, 0.3);
        assert!((lo + 1.3).abs() < 1e-15 && (hi + 0.7).abs() < 1e-15);
        let [z0, z1] = eigenvalues_2x2(-1.0, 0.3, -0.3, -1.0);
        assert!(z0.0 == -1.0 && (z0.1 + 0.3).abs() < 1e-15);
        assert!((z1.1 - 0.3).abs() < 1e-15);
    }
}
