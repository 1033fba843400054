//! Consistency of the inverse's differential with `co(∂f(x)⁻¹)`.

use rand::Rng;
use serde::Serialize;

use crate::clarke::{clarke_at, hull_of_inverses, polytope_conorm, ClarkeConfig};
use crate::criteria::Verdict;
use crate::error::{Error, Result};
use crate::finsler::Norm;
use crate::funcorpus::Map;
use crate::inverter::lift::{lift_path_with, LiftOptions};
use crate::inverter::local_inverse_check;
use crate::linalg::{self, Mat, Vector};
use crate::sampling;

/// Number of nearby images at which the inverse's Jacobian is estimated.
pub const INVERSE_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseDiffReport {
    /// Finite-difference Jacobians of the lifted inverse near `f(x)`.
    #[serde(serialize_with = "ser_mats")]
    pub estimated: Vec<Mat>,
    /// Frobenius distance of each estimate to `co(∂f(x)⁻¹)`.
    pub distances: Vec<f64>,
    pub included: bool,
    /// `1 / //∂f(x)//`.
    pub norm_bound: f64,
    /// Largest spectral norm among the estimates.
    pub measured_norm: f64,
    /// Error bound of the estimates themselves: lift residuals pulled back
    /// through the co-norm plus rounding, divided by the difference step.
    /// Inclusion is only claimed when `distance + noise_floor ≤ tol`.
    pub noise_floor: f64,
    pub tol: f64,
}

fn ser_mats<S: serde::Serializer>(m: &[Mat], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    m.iter().map(crate::criteria::mat_rows).collect::<Vec<_>>().serialize(s)
}

/// Estimate the inverse's Jacobians by central differences of lifted
/// preimages around `f(x)` and measure their distance to `co(∂f(x)⁻¹)`.
///
/// Requires a positive local-inverse certificate at `x`; otherwise (or when
/// a lift fails) the check is unavailable.
pub fn inverse_differential_report(map: &Map, x: &Vector, grid: usize, tol: f64) -> Result<InverseDiffReport> {
    let local = local_inverse_check(map, x, grid)?;
    if local.verdict != Verdict::Positive {
        return Err(Error::CheckUnavailable(format!(
            "local inverse is {} at the point",
            local.verdict
        )));
    }
    let p = clarke_at(map, x, &ClarkeConfig::default())?;
    let inv = hull_of_inverses(&p, grid)?;
    let (conorm, _) = polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, grid);
    let y0 = map.eval(x)?;
    let n = x.len();
    let rho = 1e-4 * y0.norm().max(1.0);
    let h = 1e-6 * y0.norm().max(1.0);
    let opts = LiftOptions {
        tol: 1e-14 * (1.0 + y0.norm()),
        max_steps: 200,
        ..LiftOptions::default()
    };
    let mut rng = sampling::seeded(0x1f);
    let max_residual = std::cell::Cell::new(0.0f64);
    let preimage = |y: &Vector| -> Result<Vector> {
        let r = lift_path_with(map, x, y, &opts)?;
        if r.residual > 1e-12 * (1.0 + y.norm()) {
            return Err(Error::CheckUnavailable(format!("lift to a nearby image ended as {:?}", r.status)));
        }
        max_residual.set(max_residual.get().max(r.residual));
        Ok(r.preimage_vector())
    };
    let mut estimated = Vec::with_capacity(INVERSE_SAMPLES);
    for _ in 0..INVERSE_SAMPLES {
        let yc = &y0 + sampling::unit_direction(&mut rng, n) * (rho * rng.random::<f64>());
        let mut j = Mat::zeros(n, n);
        for k in 0..n {
            let mut e = Vector::zeros(n);
            e[k] = h;
            let col = (preimage(&(&yc + &e))? - preimage(&(&yc - &e))?) / (2.0 * h);
            j.set_column(k, &col);
        }
        estimated.push(j);
    }
    let distances: Vec<f64> = estimated.iter().map(|j| inv.distance_to(j)).collect();
    let measured_norm = estimated.iter().map(linalg::sigma_max).fold(0.0, f64::max);
    let noise_floor = (n as f64).sqrt() * (max_residual.get() / conorm + f64::EPSILON * (1.0 + x.norm() + rho / conorm)) / h;
    Ok(InverseDiffReport {
        included: distances.iter().all(|d| d + noise_floor <= tol),
        noise_floor,
        estimated,
        distances,
        norm_bound: 1.0 / conorm,
        measured_norm,
        tol,
    })
}

/// Whether the sampled Jacobians of the local inverse lie within `tol` of
/// `co(∂f(x)⁻¹)`.
pub fn inverse_differential_check(map: &Map, x: &Vector, grid: usize, tol: f64) -> Result<bool> {
    Ok(inverse_differential_report(map, x, grid, tol)?.included)
}
