//! Maximal-rank assessment over a region.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::clarke::{analyze_rank, clarke_at, ClarkeConfig, MatrixPolytope};
use crate::criteria::{Certificate, Criterion, Verdict, Witness};
use crate::error::Result;
use crate::funcorpus::{next_combination, Map, Polyhedron};
use crate::linalg::{self, Vector};
use crate::region::Region;
use crate::sampling;

/// Hyperplane subsets beyond this count are not enumerated for adjacency points.
const MAX_ADJACENCY_SUBSETS: usize = 5000;

/// Points at which differentials are inspected: region anchors, uniform
/// samples and, for piecewise-affine maps, points on every reachable
/// intersection of cell boundaries (where the most pieces are active).
pub(crate) fn region_points(map: &Map, region: &Region, samples: usize, seed: u64) -> Vec<Vector> {
    let mut rng = sampling::seeded(seed);
    let mut pts = region.anchor_points();
    for _ in 0..samples {
        pts.push(region.sample(&mut rng));
    }
    if let Map::Pwa(p) = map {
        let planes = p.hyperplanes();
        let n = p.dim_in();
        let mut seeds = vec![region.center()];
        for _ in 0..4 {
            seeds.push(region.sample(&mut rng));
        }
        let mut count = 0;
        'outer: for size in 1..=n.min(planes.len()) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                count += 1;
                if count > MAX_ADJACENCY_SUBSETS {
                    break 'outer;
                }
                let rows: Vec<Vector> = idx.iter().map(|&i| planes[i].normal.clone()).collect();
                let offs: Vec<f64> = idx.iter().map(|&i| planes[i].offset).collect();
                for s in &seeds {
                    if let Some(q) = linalg::project_onto_affine(&rows, &offs, s) {
                        let q = if region.contains(&q, 1e-12) { q } else { region.project(&q) };
                        pts.push(q);
                    }
                }
                if !next_combination(&mut idx, planes.len()) {
                    break;
                }
            }
        }
    }
    pts.retain(|x| region.contains(x, 1e-9) && map.in_domain(x));
    pts
}

/// Differentials at the region points. Piecewise-affine points are
/// deduplicated by their active piece sets.
pub(crate) fn region_polytopes(map: &Map, region: &Region, samples: usize, seed: u64) -> Result<Vec<MatrixPolytope>> {
    let pts = region_points(map, region, samples, seed);
    if let Map::Pwa(p) = map {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for x in pts {
            let active = p.active_pieces(&x, crate::funcorpus::FACET_TOL)?;
            if seen.insert(active) {
                out.push(crate::clarke::clarke_exact(p, &x)?);
            }
        }
        return Ok(out);
    }
    pts.par_iter()
        .enumerate()
        .map(|(i, x)| {
            let cfg = ClarkeConfig {
                seed: sampling::derive_seed(seed, i as u64),
                ..ClarkeConfig::default()
            };
            clarke_at(map, x, &cfg)
        })
        .collect()
}

/// Whether every element of `∂f(x)` is invertible for all `x` in the region.
///
/// Piecewise-affine maps have finitely many distinct differentials, all of
/// which are visited, so their verdicts are certified. For black-box maps a
/// clean sweep is reported as heuristic.
pub fn check_maximal_rank_region(map: &Map, region: &Region, samples: usize, grid: usize, seed: u64) -> Result<Certificate> {
    map.require_square("maximal rank")?;
    let polys = region_polytopes(map, region, samples, seed)?;
    let analyses: Vec<_> = polys.par_iter().map(|p| analyze_rank(p, grid)).collect();
    let exact = matches!(map, Map::Pwa(_));
    let min_det = analyses.iter().map(|a| a.min_abs_det).fold(f64::INFINITY, f64::min);
    let base = |v: Verdict| {
        Certificate::new(Criterion::MaximalRank, v)
            .param("region", region.describe())
            .param("samples", samples)
            .param("grid", grid)
            .param("seed", seed)
            .evidence("points", polys.len() as f64)
            .evidence("min_abs_det", min_det)
    };
    if let Some((p, a)) = polys.iter().zip(&analyses).find(|(_, a)| a.verdict == Verdict::Negative) {
        let (w, m, d) = a.witness.clone().expect("negative analyses carry a witness");
        return Ok(base(Verdict::Negative).certified(p.is_exact()).witness(
            Witness::new("singular hull element")
                .at(p.base_point())
                .weights(&w)
                .matrix(&m)
                .value(d),
        ));
    }
    let all_positive = analyses.iter().all(|a| a.verdict == Verdict::Positive);
    Ok(if all_positive && exact {
        base(Verdict::Positive).certified(true)
    } else if all_positive {
        base(Verdict::Heuristic).note("every sampled differential has maximal rank; the map is a black box")
    } else {
        base(Verdict::Heuristic).note("determinant bound not certified on every sampled differential")
    })
}

/// Region for the maximal-rank check of a domain-restricted map: the ball
/// clipped to its horizon when needed.
pub(crate) fn clip_region(domain: &Polyhedron, region: &Region) -> Region {
    match region {
        Region::Ball { center, radius } => {
            let h = domain.inner_distance(center);
            if *radius > h && h > 0.0 {
                Region::Ball {
                    center: center.clone(),
                    radius: h,
                }
            } else {
                region.clone()
            }
        }
        Region::Box { .. } => region.clone(),
    }
}
