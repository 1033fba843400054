//! Radial profiles `m(t)` (set co-norm) and `s(t)` (spectral power) over
//! growing balls.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clarke::{clarke_at, conorm_floor, polytope_conorm, ClarkeConfig, MatrixPolytope};
use crate::error::{Error, Result};
use crate::finsler::Norm;
use crate::funcorpus::{next_combination, Map, Polyhedron, PwaMap};
use crate::linalg::{self, Vector};
use crate::sampling;

/// Largest piece count for the exact subset enumeration.
const MAX_EXACT_PIECES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `m(t) = inf //∂f(x)//` over the ball.
    CoNorm,
    /// `s(t) = inf min |λ|ⁿ` over eigenvalues of hull elements in the ball.
    SpectralPowerN,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub center: Vec<f64>,
    /// Value at the center itself (`t = 0`).
    pub center_value: f64,
    pub radii: Vec<f64>,
    /// Cumulative-minimum values (nonincreasing).
    pub values: Vec<f64>,
    /// Per-ball estimates before the cumulative minimum.
    pub raw_values: Vec<f64>,
    /// Certified lower bounds per radius, when the function class allows them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floors: Option<Vec<f64>>,
    pub samples: Vec<usize>,
    /// Minimizing point per radius.
    pub witnesses: Vec<Vec<f64>>,
    /// True when the per-ball infimum is exact up to the hull grid.
    pub exact: bool,
}

impl RadialProfile {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(self.center_value, f64::min)
    }

    pub fn horizon(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    /// Tab-separated `t value` series (including `t = 0`).
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("t\tvalue\traw\n");
        s.push_str(&format!("{:.16e}\t{:.16e}\t{:.16e}\n", 0.0, self.center_value, self.center_value));
        for ((t, v), r) in self.radii.iter().zip(&self.values).zip(&self.raw_values) {
            s.push_str(&format!("{t:.16e}\t{v:.16e}\t{r:.16e}\n"));
        }
        s
    }
}

/// Value of one polytope for the given profile kind: the grid co-norm
/// estimate or `min |λ|ⁿ` over grid elements.
pub(crate) fn polytope_value(p: &MatrixPolytope, kind: ProfileKind, grid: usize) -> f64 {
    match kind {
        ProfileKind::CoNorm => polytope_conorm(p, &Norm::Euclidean, &Norm::Euclidean, grid).0,
        ProfileKind::SpectralPowerN => {
            let n = p.shape().0 as i32;
            let (reduced, _) = p.reduced();
            let (_, mats, _) = reduced.grid_elements(grid);
            mats.par_iter()
                .map(|m| {
                    linalg::eigenvalues(m)
                        .iter()
                        .map(|z| z.norm())
                        .fold(f64::INFINITY, f64::min)
                        .powi(n)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn polytope_floor(p: &MatrixPolytope, kind: ProfileKind, grid: usize) -> Option<f64> {
    match kind {
        ProfileKind::CoNorm => Some(conorm_floor(p, &Norm::Euclidean, &Norm::Euclidean, grid)),
        ProfileKind::SpectralPowerN => {
            // Eigenvalues of any hull element stay within the perturbation
            // margin of some grid element's eigenvalues.
            let n = p.shape().0 as i32;
            let (reduced, _) = p.reduced();
            let (_, mats, sg) = reduced.grid_elements(grid);
            if !sg.exhaustive {
                return Some(0.0);
            }
            let e = sg.covering_fraction() * reduced.diameter(linalg::sigma_max);
            Some(
                mats.par_iter()
                    .map(|m| {
                        let eigs = linalg::eigenvalues(m);
                        let margin = linalg::eigenvalue_perturbation_bound(m, &eigs, e);
                        eigs.iter()
                            .map(|z| (z.norm() - margin).max(0.0))
                            .fold(f64::INFINITY, f64::min)
                            .powi(n)
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    .fold(f64::INFINITY, f64::min),
            )
        }
    }
}

/// Estimate `m(t)` or `s(t)` on the closed balls `B̄(x₀, t)`.
///
/// Piecewise-affine maps are handled exactly: every set of pieces whose
/// cells share a point is enumerated with its distance from `x₀`, so the
/// ball infimum is the minimum over the sets within reach. Other maps are
/// sampled (center, axis points, uniform points) and locally refined; those
/// values are upper bounds on the true infimum.
pub fn radial_profile(
    map: &Map,
    x0: &Vector,
    radii: &[f64],
    kind: ProfileKind,
    samples: usize,
    grid: usize,
    seed: u64,
) -> Result<RadialProfile> {
    map.require_square("radial profile")?;
    if radii.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be positive and strictly increasing"));
    }
    if !map.in_domain(x0) {
        return Err(Error::PointOutsideDomain {
            point: x0.iter().copied().collect(),
        });
    }
    let horizon = map.domain().inner_distance(x0);
    let tmax = *radii.last().expect("nonempty");
    if tmax > horizon {
        return Err(Error::HorizonExceeded { radius: tmax, horizon });
    }
    let grid = grid.max(1);
    match map {
        Map::Pwa(p) if p.pieces().len() <= MAX_EXACT_PIECES => pwa_profile(p, x0, radii, kind, grid),
        _ => sampled_profile(map, x0, radii, kind, samples, grid, seed),
    }
}

struct PieceSet {
    distance: f64,
    nearest: Vector,
    value: f64,
    floor: Option<f64>,
}

fn pwa_profile(map: &PwaMap, x0: &Vector, radii: &[f64], kind: ProfileKind, grid: usize) -> Result<RadialProfile> {
    let k = map.pieces().len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=k {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            subsets.push(idx.clone());
            if !next_combination(&mut idx, k) {
                break;
            }
        }
    }
    let sets: Vec<PieceSet> = subsets
        .par_iter()
        .filter_map(|s| {
            let cell = s
                .iter()
                .fold(map.domain().clone(), |acc: Polyhedron, &i| acc.intersect(&map.pieces()[i].cell));
            let (nearest, distance) = cell.project(x0)?;
            let poly = MatrixPolytope::exact(s.iter().map(|&i| map.pieces()[i].matrix.clone()).collect(), nearest.clone())
                .ok()?;
            Some(PieceSet {
                distance,
                value: polytope_value(&poly, kind, grid),
                floor: polytope_floor(&poly, kind, grid),
                nearest,
            })
        })
        .collect();
    let center_value = sets
        .iter()
        .filter(|s| s.distance <= 1e-12)
        .map(|s| s.value)
        .fold(f64::INFINITY, f64::min);
    let mut values = Vec::with_capacity(radii.len());
    let mut floors = Vec::with_capacity(radii.len());
    let mut witnesses = Vec::with_capacity(radii.len());
    for &t in radii {
        let within: Vec<&PieceSet> = sets.iter().filter(|s| s.distance <= t + 1e-12).collect();
        let best = within
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("the center's own cell is within reach");
        values.push(best.value);
        witnesses.push(best.nearest.iter().copied().collect());
        floors.push(
            within
                .iter()
                .map(|s| s.floor.unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min),
        );
    }
    Ok(finish(kind, x0, center_value, radii, values, Some(floors), vec![sets.len(); radii.len()], witnesses, true))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kind: ProfileKind,
    x0: &Vector,
    center_value: f64,
    radii: &[f64],
    raw: Vec<f64>,
    floors: Option<Vec<f64>>,
    samples: Vec<usize>,
    witnesses: Vec<Vec<f64>>,
    exact: bool,
) -> RadialProfile {
    let mut values = Vec::with_capacity(raw.len());
    let mut current = center_value;
    for v in &raw {
        current = current.min(*v);
        values.push(current);
    }
    let floors = floors.map(|f| {
        let mut cur = f64::INFINITY;
        f.into_iter()
            .map(|v| {
                cur = cur.min(v);
                cur
            })
            .collect()
    });
    RadialProfile {
        kind,
        center: x0.iter().copied().collect(),
        center_value,
        radii: radii.to_vec(),
        values,
        raw_values: raw,
        floors,
        samples,
        witnesses,
        exact,
    }
}

#[allow(clippy::too_many_arguments)]
fn sampled_profile(
    map: &Map,
    x0: &Vector,
    radii: &[f64],
    kind: ProfileKind,
    samples: usize,
    grid: usize,
    seed: u64,
) -> Result<RadialProfile> {
    let cfg = ClarkeConfig {
        seed,
        ..ClarkeConfig::default()
    };
    let value_at = |x: &Vector| -> Result<f64> { Ok(polytope_value(&clarke_at(map, x, &cfg)?, kind, grid)) };
    let center_value = value_at(x0)?;
    let dim = x0.len();
    let mut rng = sampling::seeded(seed);
    let mut raw = Vec::with_capacity(radii.len());
    let mut witnesses = Vec::with_capacity(radii.len());
    let mut counts = Vec::with_capacity(radii.len());
    for &t in radii {
        let mut pts = vec![x0.clone()];
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut p = x0.clone();
                p[i] += sign * t;
                pts.push(p);
            }
        }
        for _ in 0..samples {
            let u: f64 = rng.random();
            let r = t * u.powf(1.0 / dim as f64);
            pts.push(x0 + sampling::unit_direction(&mut rng, dim) * r);
        }
        pts.retain(|p| map.in_domain(p));
        let vals = pts.par_iter().map(|p| value_at(p)).collect::<Result<Vec<_>>>()?;
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut best = (vals[order[0]], pts[order[0]].clone());
        // Compass refinement inside the ball from the three best samples.
        for &i in order.iter().take(3) {
            let mut x = pts[i].clone();
            let mut v = vals[i];
            let mut step = t / 4.0;
            while step > 1e-12 * (1.0 + t) {
                let mut improved = false;
                for k in 0..dim {
                    for sign in [1.0, -1.0] {
                        let mut y = x.clone();
                        y[k] += sign * step;
                        let d = &y - x0;
                        let dn = d.norm();
                        if dn > t {
                            y = x0 + d * (t / dn);
                        }
                        if !map.in_domain(&y) {
                            continue;
                        }
                        let w = value_at(&y)?;
                        if w < v {
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
            if v < best.0 {
                best = (v, x);
            }
        }
        raw.push(best.0);
        witnesses.push(best.1.iter().copied().collect());
        counts.push(pts.len());
    }
    Ok(finish(kind, x0, center_value, radii, raw, None, counts, witnesses, false))
}
