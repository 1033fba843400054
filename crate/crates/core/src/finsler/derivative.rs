//! Scalar derivatives D± of maps between patches, sampled Lipschitz
//! constants and sup-norm estimates of the Clarke differential.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clarke::{clarke_at, polytope_norm, ClarkeConfig};
use crate::error::{Error, Result};
use crate::finsler::norm::Norm;
use crate::finsler::patch::FinslerPatch;
use crate::finsler::path::segment_distance;
use crate::funcorpus::Map;
use crate::linalg::Vector;
use crate::region::Region;
use crate::sampling;

/// Ratio statistics at one sampling radius.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RadiusProfile {
    pub radius: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScalarDerivativeEstimate {
    /// D⁻ estimate: smallest ratio at the smallest radius.
    pub lower: f64,
    /// D⁺ estimate: largest ratio at the smallest radius.
    pub upper: f64,
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Full per-radius profile, for convergence diagnostics.
    pub profile: Vec<RadiusProfile>,
    /// Samples with `f(y) = f(x)` for `y ≠ x` (ratio recorded as 0).
    pub degenerate: usize,
}

const SEGMENT_NODES: usize = 8;

/// Estimate D±ₓf from distance ratios `d_N(f(y), f(x)) / d_M(y, x)` over
/// sphere samples `|y − x| = r`. Distances between nearby points use the
/// straight chart segment, the local form of the Finsler metric.
pub fn scalar_derivatives(
    map: &Map,
    source: &FinslerPatch,
    target: &FinslerPatch,
    x: &Vector,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ScalarDerivativeEstimate> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be positive and strictly decreasing"));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let rmax = radii[0];
    let horizon = source.horizon(x).min(domain_margin(map, x));
    if horizon < rmax {
        return Err(Error::HorizonExceeded { radius: rmax, horizon });
    }
    let fx = map.eval(x)?;
    let mut rng = sampling::seeded(seed);
    let dim = x.len();
    let mut profile = Vec::with_capacity(radii.len());
    for &r in radii {
        let dirs: Vec<Vector> = (0..samples).map(|_| sampling::unit_direction(&mut rng, dim)).collect();
        let ratios: Vec<f64> = dirs
            .par_iter()
            .map(|u| {
                let y = x + u * r;
                let fy = map.eval(&y)?;
                let dm = segment_distance(source, &y, x, SEGMENT_NODES);
                let dn = segment_distance(target, &fy, &fx, SEGMENT_NODES);
                Ok(dn / dm)
            })
            .collect::<Result<Vec<_>>>()?;
        profile.push(RadiusProfile {
            radius: r,
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            degenerate: ratios.iter().filter(|v| **v == 0.0).count(),
        });
    }
    let last = profile.last().expect("nonempty radii");
    Ok(ScalarDerivativeEstimate {
        lower: last.min_ratio,
        upper: last.max_ratio,
        radii: radii.to_vec(),
        samples_per_radius: samples,
        degenerate: profile.iter().map(|p| p.degenerate).sum(),
        profile,
    })
}

fn domain_margin(map: &Map, x: &Vector) -> f64 {
    map.domain().inner_distance(x)
}

/// Largest difference quotient `|f(x) − f(y)| / |x − y|` over `pairs`
/// random nearby pairs in the region (separations log-uniform between
/// 1e-4 and 1e-1 of the region diameter), plus pairs at the region's
/// anchor points.
pub fn sampled_lipschitz(map: &Map, region: &Region, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = sampling::seeded(seed);
    let diam = region.diameter();
    let dim = region.dim();
    let center = region.center();
    let mut work: Vec<(Vector, Vector)> = Vec::with_capacity(pairs + 64);
    for a in region.anchor_points() {
        for k in 0..8 {
            let r = diam * 10f64.powf(-4.0 + 3.0 * k as f64 / 7.0);
            let toward = &center - &a;
            let dir = if toward.norm() > 0.0 {
                &toward / toward.norm()
            } else {
                sampling::unit_direction(&mut rng, dim)
            };
            work.push((a.clone(), &a + dir * r));
        }
    }
    for _ in 0..pairs {
        let x = region.sample(&mut rng);
        let r = diam * 10f64.powf(rng.random_range(-4.0..-1.0));
        let y = region.project(&(&x + sampling::unit_direction(&mut rng, dim) * r));
        work.push((x, y));
    }
    let quotients: Vec<f64> = work
        .par_iter()
        .map(|(x, y)| {
            let d = (x - y).norm();
            if d == 0.0 || !map.in_domain(x) || !map.in_domain(y) {
                return Ok(0.0);
            }
            Ok((map.eval(x)? - map.eval(y)?).norm() / d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(quotients.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SupNormEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// True when the value is exact for the function class (piecewise-affine maps).
    pub exact: bool,
}

/// Estimate of `sup_{x ∈ region} |||∂f(x)|||` under Euclidean norms:
/// exact over the pieces meeting a ball for piecewise-affine maps; sampled
/// and locally refined otherwise.
pub fn sup_norm_estimate(map: &Map, region: &Region, samples: usize, seed: u64) -> Result<SupNormEstimate> {
    let e = Norm::Euclidean;
    let cfg = ClarkeConfig {
        seed,
        ..ClarkeConfig::default()
    };
    let norm_at = |x: &Vector| -> Result<f64> { polytope_norm(&clarke_at(map, x, &cfg)?, &e, &e) };

    if let Map::Pwa(pwa) = map {
        if let Region::Ball { center, radius } = region {
            let mut best = (0.0, center.clone());
            for piece in pwa.pieces() {
                let Some((p, d)) = piece.cell.intersect(pwa.domain()).project(center) else {
                    continue;
                };
                if d <= *radius {
                    let v = crate::linalg::sigma_max(&piece.matrix);
                    if v > best.0 {
                        best = (v, p);
                    }
                }
            }
            return Ok(SupNormEstimate {
                value: best.0,
                argmax: best.1.iter().copied().collect(),
                exact: true,
            });
        }
    }

    let mut rng = sampling::seeded(seed);
    let mut points = region.anchor_points();
    for _ in 0..samples {
        points.push(region.sample(&mut rng));
    }
    points.retain(|p| map.in_domain(p));
    let values: Vec<f64> = points.par_iter().map(|p| norm_at(p)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = (values[order[0]], points[order[0]].clone());
    if !matches!(map, Map::Pwa(_)) {
        // Compass refinement from the three best samples.
        for &i in order.iter().take(3) {
            let mut x = points[i].clone();
            let mut v = values[i];
            let mut step = region.diameter() / (samples.max(1) as f64).powf(1.0 / region.dim() as f64);
            while step > 1e-12 * (1.0 + x.norm()) {
                let mut improved = false;
                for k in 0..x.len() {
                    for sign in [1.0, -1.0] {
                        let mut y = x.clone();
                        y[k] += sign * step;
                        let y = region.project(&y);
                        if !map.in_domain(&y) {
                            continue;
                        }
                        let w = norm_at(&y)?;
                        if w > v {
                            x = y;
                            v = w;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    Ok(SupNormEstimate {
        value: best.0,
        argmax: best.1.iter().copied().collect(),
        exact: false,
    })
}
