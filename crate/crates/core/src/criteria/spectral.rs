//! Eigenvalue-avoidance criteria: ε-disc, disc sequences and the half plane.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::clarke::MatrixPolytope;
use crate::criteria::rank::{check_maximal_rank_region, region_polytopes};
use crate::criteria::{Certificate, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::funcorpus::Map;
use crate::linalg::{self, Mat};
use crate::region::Region;

/// Eigen-data of one grid element of a differential.
#[derive(Debug, Clone)]
pub(crate) struct SpectrumSample {
    pub polytope: usize,
    pub weights: Vec<f64>,
    pub matrix: Mat,
    pub eigenvalues: Vec<Complex<f64>>,
    /// Any element within the grid's covering radius has its eigenvalues
    /// within `margin` of these (infinite when the grid is not exhaustive).
    pub margin: f64,
}

pub(crate) fn spectrum_samples(polys: &[MatrixPolytope], grid: usize) -> Vec<SpectrumSample> {
    polys
        .par_iter()
        .enumerate()
        .flat_map_iter(|(pi, p)| {
            let (reduced, idx) = p.reduced();
            let (weights, mats, sg) = reduced.grid_elements(grid.max(1));
            let e = if sg.exhaustive {
                sg.covering_fraction() * reduced.diameter(linalg::sigma_max)
            } else {
                f64::INFINITY
            };
            let k = p.len();
            weights.into_iter().zip(mats).map(move |(w, m)| {
                let eigs = linalg::eigenvalues(&m);
                let margin = if e.is_finite() {
                    linalg::eigenvalue_perturbation_bound(&m, &eigs, e)
                } else {
                    f64::INFINITY
                };
                SpectrumSample {
                    polytope: pi,
                    weights: crate::clarke::expand_weights(&w, &idx, k),
                    matrix: m,
                    eigenvalues: eigs,
                    margin,
                }
            })
        })
        .collect()
}

/// Disc avoidance without the maximal-rank precondition: every eigenvalue
/// of every differential over the region stays outside `|λ| ≤ eps`.
fn eps_disc_core(map: &Map, region: &Region, eps: f64, samples: usize, grid: usize, seed: u64) -> Result<Certificate> {
    let polys = region_polytopes(map, region, samples, seed)?;
    let spec = spectrum_samples(&polys, grid);
    let exact = polys.iter().all(MatrixPolytope::is_exact) && matches!(map, Map::Pwa(_));
    let mut min_mod = f64::INFINITY;
    let mut min_slack = f64::INFINITY;
    let mut hit: Option<(&SpectrumSample, Complex<f64>)> = None;
    for s in &spec {
        for z in &s.eigenvalues {
            let r = z.norm();
            min_mod = min_mod.min(r);
            min_slack = min_slack.min(r - s.margin);
            if r <= eps && hit.is_none() {
                hit = Some((s, *z));
            }
        }
    }
    let base = |v: Verdict| {
        Certificate::new(Criterion::EpsDisc, v)
            .param("eps", eps)
            .param("region", region.describe())
            .param("grid", grid)
            .param("samples", samples)
            .evidence("min_abs_eigenvalue", min_mod)
            .evidence("certified_min_abs_eigenvalue", min_slack)
            .evidence("elements", spec.len() as f64)
    };
    if let Some((s, z)) = hit {
        return Ok(base(Verdict::Negative).certified(polys[s.polytope].is_exact()).witness(
            Witness::new("eigenvalue inside the disc")
                .at(polys[s.polytope].base_point())
                .weights(&s.weights)
                .matrix(&s.matrix)
                .eigenvalue(z),
        ));
    }
    Ok(if min_slack > eps && exact {
        base(Verdict::Positive).certified(true)
    } else if min_slack > eps {
        base(Verdict::Heuristic).note("eigenvalue margins hold on sampled differentials of a black-box map")
    } else {
        base(Verdict::Heuristic).note("sampled eigenvalues avoid the disc but the perturbation margin is not certified")
    })
}

/// Whether the spectrum of `∂f` over the region avoids the closed disc of
/// radius `eps` about the origin, on top of a positive maximal-rank check.
pub fn spectral_eps_disc(map: &Map, region: &Region, eps: f64, samples: usize, grid: usize, seed: u64) -> Result<Certificate> {
    map.require_square("eps-disc")?;
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let rank = check_maximal_rank_region(map, region, samples, grid, seed)?;
    let mut cert = eps_disc_core(map, region, eps, samples, grid, seed)?;
    if cert.verdict == Verdict::Positive && rank.verdict != Verdict::Positive {
        cert.verdict = Verdict::Heuristic;
        cert.certified = false;
        cert.notes.push("maximal rank is not certified on the region".into());
    }
    cert.sub_certificates.push(rank);
    Ok(cert)
}

/// Discs `D(t_k, r_k)` to be avoided by the spectrum, with `t_k → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscSpec {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    /// The sequence must reach `|t_k| ≤ threshold` for a positive verdict.
    pub threshold: f64,
}

impl DiscSpec {
    pub fn new(centers: Vec<f64>, radii: Vec<f64>, threshold: f64) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::invalid("disc centers and radii must be nonempty and of equal length"));
        }
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::invalid("disc radii must be positive"));
        }
        if centers.iter().any(|t| *t == 0.0 || !t.is_finite()) {
            return Err(Error::invalid("disc centers must be finite and nonzero"));
        }
        if centers.windows(2).any(|w| w[1].abs() > w[0].abs()) {
            return Err(Error::invalid("disc centers must decrease monotonically in modulus"));
        }
        if !(threshold > 0.0) {
            return Err(Error::invalid("disc threshold must be positive"));
        }
        Ok(DiscSpec { centers, radii, threshold })
    }

    /// `t_k = 1/k`, `r_k = r` for `k = 1..=count`.
    pub fn harmonic(count: usize, radius: f64, threshold: f64) -> Result<Self> {
        DiscSpec::new((1..=count).map(|k| 1.0 / k as f64).collect(), vec![radius; count], threshold)
    }

    /// `t_k = 2^{−k}`, `r_k = 2^{−k−1}` until `t_k ≤ threshold`.
    pub fn dyadic(threshold: f64) -> Result<Self> {
        let mut centers = Vec::new();
        let mut k = 1;
        loop {
            let t = 0.5f64.powi(k);
            centers.push(t);
            if t <= threshold {
                break;
            }
            k += 1;
        }
        let radii = centers.iter().map(|t| t / 2.0).collect();
        DiscSpec::new(centers, radii, threshold)
    }
}

/// Injectivity via a sequence of avoided discs: each shifted map
/// `f − t_k I` must keep its spectrum outside `|λ| ≤ r_k`, the sequence
/// must reach the threshold, and maximal rank must be certified.
pub fn disc_sequence_injectivity(
    map: &Map,
    discs: &DiscSpec,
    region: &Region,
    samples: usize,
    grid: usize,
    seed: u64,
) -> Result<Certificate> {
    map.require_square("disc sequence")?;
    let rank = check_maximal_rank_region(map, region, samples, grid, seed)?;
    let subs: Vec<Certificate> = discs
        .centers
        .par_iter()
        .zip(&discs.radii)
        .map(|(&t, &r)| eps_disc_core(&map.shifted(t), region, r, samples, grid, seed))
        .collect::<Result<_>>()?;
    let reached = discs.centers.last().is_some_and(|t| t.abs() <= discs.threshold);
    let base = |v: Verdict| {
        Certificate::new(Criterion::DiscSequence, v)
            .param("discs", discs)
            .param("region", region.describe())
            .param("grid", grid)
            .param("samples", samples)
            .evidence("discs_checked", subs.len() as f64)
            .evidence("last_center", discs.centers.last().copied().unwrap_or(f64::NAN))
    };
    let mut cert = if let Some((k, s)) = subs.iter().enumerate().find(|(_, s)| s.verdict == Verdict::Negative) {
        let t = discs.centers[k];
        let mut w = s.witnesses[0].clone();
        if let Some([re, im]) = w.eigenvalue {
            w.eigenvalue = Some([re + t, im]);
        }
        w.label = format!("eigenvalue inside disc {} (center {t}, radius {})", k + 1, discs.radii[k]);
        w.value = Some(t);
        base(Verdict::Negative).certified(s.certified).witness(w)
    } else if rank.verdict == Verdict::Negative {
        base(Verdict::Negative)
            .certified(rank.certified)
            .note("maximal rank fails on the region")
    } else if subs.iter().all(|s| s.verdict == Verdict::Positive) && rank.verdict == Verdict::Positive {
        if reached {
            base(Verdict::Positive).certified(true)
        } else {
            base(Verdict::Inconclusive).note(format!(
                "every disc is avoided but the sequence stops above the threshold {}",
                discs.threshold
            ))
        }
    } else {
        base(Verdict::Heuristic).note("disc avoidance or maximal rank only holds on samples")
    };
    cert.sub_certificates.push(rank);
    cert.sub_certificates.extend(subs);
    Ok(cert)
}

/// Injectivity when the spectrum of `∂f` lies in the open left half plane,
/// checked through eigenvalue real parts (with perturbation margins) and an
/// internal dyadic disc sequence `t_k = 2^{−k}`, `r_k = 2^{−k−1}`.
pub fn half_plane_injectivity(map: &Map, region: &Region, samples: usize, grid: usize, seed: u64) -> Result<Certificate> {
    map.require_square("half plane")?;
    let polys = region_polytopes(map, region, samples, seed)?;
    let spec = spectrum_samples(&polys, grid);
    let exact = matches!(map, Map::Pwa(_));
    let mut max_re = f64::NEG_INFINITY;
    let mut max_re_margin = f64::NEG_INFINITY;
    let mut worst: Option<(&SpectrumSample, Complex<f64>)> = None;
    for s in &spec {
        for z in &s.eigenvalues {
            if z.re > max_re {
                max_re = z.re;
                worst = Some((s, *z));
            }
            max_re_margin = max_re_margin.max(z.re + s.margin);
        }
    }
    let base = |v: Verdict| {
        Certificate::new(Criterion::HalfPlane, v)
            .param("region", region.describe())
            .param("grid", grid)
            .param("samples", samples)
            .evidence("max_real_part", max_re)
            .evidence("certified_max_real_part", max_re_margin)
    };
    if let Some((s, z)) = worst.filter(|(_, z)| z.re >= 0.0) {
        return Ok(base(Verdict::Negative).certified(polys[s.polytope].is_exact()).witness(
            Witness::new("eigenvalue with nonnegative real part")
                .at(polys[s.polytope].base_point())
                .weights(&s.weights)
                .matrix(&s.matrix)
                .eigenvalue(z),
        ));
    }
    let discs = disc_sequence_injectivity(map, &DiscSpec::dyadic(1e-3)?, region, samples, grid, seed)?;
    let mut cert = if max_re_margin < 0.0 && exact && discs.verdict == Verdict::Positive {
        base(Verdict::Positive).certified(true)
    } else if discs.verdict == Verdict::Negative {
        base(Verdict::Negative)
            .certified(discs.certified)
            .note("the dyadic disc sequence is not avoided")
    } else {
        base(Verdict::Heuristic).note("real parts are negative on samples; margin or disc sequence not certified")
    };
    cert.sub_certificates.push(discs);
    Ok(cert)
}
