//! Polyline paths, their Finsler lengths and grid-graph distances.

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finsler::patch::FinslerPatch;
use crate::funcorpus::domain_box;
use crate::linalg::Vector;

/// Largest grid the distance solver will build.
const MAX_GRID_NODES: usize = 400_000;

/// A polyline with at least two vertices and no repeated consecutive vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylinePath {
    vertices: Vec<Vector>,
}

impl PolylinePath {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::DegeneratePath("a path needs at least two vertices".into()));
        }
        if vertices.windows(2).any(|w| (&w[1] - &w[0]).norm() == 0.0) {
            return Err(Error::DegeneratePath("consecutive vertices coincide".into()));
        }
        Ok(PolylinePath { vertices })
    }

    pub fn segment(a: Vector, b: Vector) -> Result<Self> {
        PolylinePath::new(vec![a, b])
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn start(&self) -> &Vector {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Vector {
        self.vertices.last().expect("at least two vertices")
    }

    /// Euclidean (chart) length.
    pub fn chart_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// Point at arc-length fraction `s ∈ [0, 1]` of the chart length.
    pub fn point_at(&self, s: f64) -> Vector {
        let total = self.chart_length();
        let mut target = s.clamp(0.0, 1.0) * total;
        for w in self.vertices.windows(2) {
            let len = (&w[1] - &w[0]).norm();
            if target <= len {
                return &w[0] + (&w[1] - &w[0]) * (target / len);
            }
            target -= len;
        }
        self.end().clone()
    }
}

fn segment_length(patch: &FinslerPatch, a: &Vector, b: &Vector, subdivisions: usize) -> f64 {
    let d = b - a;
    let h = 1.0 / subdivisions as f64;
    (0..subdivisions)
        .map(|k| {
            let t = (k as f64 + 0.5) * h;
            patch.norm(&(a + &d * t), &d) * h
        })
        .sum()
}

/// Length `∫ ‖γ′(t)‖_{γ(t)} dt` by the composite midpoint rule with
/// `subdivisions` nodes per segment.
pub fn path_length(patch: &FinslerPatch, path: &PolylinePath, subdivisions: usize) -> Result<f64> {
    if subdivisions == 0 {
        return Err(Error::invalid("subdivisions must be at least 1"));
    }
    // The domain is convex, so vertices inside imply segments inside.
    if let Some(v) = path.vertices().iter().find(|v| !patch.contains(v)) {
        return Err(Error::PathLeavesDomain {
            point: v.iter().copied().collect(),
        });
    }
    Ok(path
        .vertices()
        .windows(2)
        .map(|w| segment_length(patch, &w[0], &w[1], subdivisions))
        .sum())
}

/// Length of the straight chart segment, the local approximation of the
/// Finsler distance between nearby points.
pub fn segment_distance(patch: &FinslerPatch, a: &Vector, b: &Vector, subdivisions: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    segment_length(patch, a, b, subdivisions.max(1))
}

/// Quadrature nodes for the final length of a refined path: enough that
/// each node spans a small fraction of the mesh.
fn fine_subdivisions(a: &Vector, b: &Vector, mesh: f64) -> usize {
    ((a - b).norm() / mesh * 16.0).ceil().clamp(16.0, 1e6) as usize
}

fn polyline_length(patch: &FinslerPatch, pts: &[Vector], mesh: f64) -> f64 {
    pts.windows(2)
        .map(|w| segment_length(patch, &w[0], &w[1], fine_subdivisions(&w[0], &w[1], mesh)))
        .sum()
}

/// Upper bound on the Finsler distance between `a` and `b`: shortest path
/// on a mesh-spaced grid graph (edges between nodes within 1.5·mesh),
/// followed by vertex-perturbation shortening of the polyline.
pub fn finsler_distance(patch: &FinslerPatch, a: &Vector, b: &Vector, mesh: f64) -> Result<(f64, PolylinePath)> {
    if !(mesh > 0.0) {
        return Err(Error::invalid("mesh must be positive"));
    }
    for p in [a, b] {
        if p.len() != patch.dim() {
            return Err(Error::DimensionMismatch {
                context: "distance endpoint",
                expected: patch.dim(),
                found: p.len(),
            });
        }
        if !patch.contains(p) {
            return Err(Error::invalid(format!("endpoint {:?} lies outside the patch", p.as_slice())));
        }
    }
    if a == b {
        return Err(Error::DegeneratePath("endpoints coincide".into()));
    }
    let dim = patch.dim();

    // Grid box: the domain's box, trimmed around the endpoints.
    let (dlo, dhi) = domain_box(patch.domain(), dim);
    let pad = 0.5 * (a - b).norm() + 2.0 * mesh;
    let lo = Vector::from_fn(dim, |i, _| (a[i].min(b[i]) - pad).max(dlo[i]));
    let hi = Vector::from_fn(dim, |i, _| (a[i].max(b[i]) + pad).min(dhi[i]));
    let counts: Vec<usize> = (0..dim).map(|i| ((hi[i] - lo[i]) / mesh).floor() as usize + 1).collect();
    let total = counts.iter().try_fold(1usize, |acc, c| acc.checked_mul(*c)).unwrap_or(usize::MAX);
    if total > MAX_GRID_NODES {
        return Err(Error::invalid(format!("mesh {mesh} needs {total} grid nodes; use a coarser mesh")));
    }

    let point_of = |mut idx: usize| -> Vector {
        Vector::from_fn(dim, |i, _| {
            let k = idx % counts[i];
            idx /= counts[i];
            lo[i] + k as f64 * mesh
        })
    };
    let mut nodes: Vec<Vector> = Vec::with_capacity(total + 2);
    let mut grid_id = vec![usize::MAX; total];
    for (g, slot) in grid_id.iter_mut().enumerate() {
        let p = point_of(g);
        if patch.contains(&p) {
            *slot = nodes.len();
            nodes.push(p);
        }
    }
    let ia = nodes.len();
    nodes.push(a.clone());
    let ib = nodes.len();
    nodes.push(b.clone());

    // Neighbour offsets within 1.5·mesh.
    let mut offsets: Vec<Vec<i64>> = Vec::new();
    let mut off = vec![-1i64; dim];
    loop {
        let sq: i64 = off.iter().map(|v| v * v).sum();
        let positive = off.iter().find(|v| **v != 0).is_some_and(|v| *v > 0);
        if sq > 0 && (sq as f64).sqrt() <= 1.5 && positive {
            offsets.push(off.clone());
        }
        let mut i = 0;
        while i < dim {
            off[i] += 1;
            if off[i] <= 1 {
                break;
            }
            off[i] = -1;
            i += 1;
        }
        if i == dim {
            break;
        }
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for g in 0..total {
        let u = grid_id[g];
        if u == usize::MAX {
            continue;
        }
        let mut coords = Vec::with_capacity(dim);
        let mut idx = g;
        for c in &counts {
            coords.push((idx % c) as i64);
            idx /= c;
        }
        for o in &offsets {
            let mut h = 0usize;
            let mut stride = 1usize;
            let mut ok = true;
            for i in 0..dim {
                let c = coords[i] + o[i];
                if c < 0 || c >= counts[i] as i64 {
                    ok = false;
                    break;
                }
                h += c as usize * stride;
                stride *= counts[i];
            }
            if ok && grid_id[h] != usize::MAX {
                edges.push((u, grid_id[h]));
            }
        }
    }
    // Endpoints connect to grid nodes within 1.5·mesh (located through the grid).
    for &e in &[ia, ib] {
        let p = nodes[e].clone();
        let base: Vec<i64> = (0..dim).map(|i| ((p[i] - lo[i]) / mesh).floor() as i64).collect();
        let mut off = vec![-2i64; dim];
        loop {
            let mut h = 0usize;
            let mut stride = 1usize;
            let mut ok = true;
            for i in 0..dim {
                let c = base[i] + off[i];
                if c < 0 || c >= counts[i] as i64 {
                    ok = false;
                    break;
                }
                h += c as usize * stride;
                stride *= counts[i];
            }
            if ok && grid_id[h] != usize::MAX && (&nodes[grid_id[h]] - &p).norm() <= 1.5 * mesh {
                edges.push((e, grid_id[h]));
            }
            let mut i = 0;
            while i < dim {
                off[i] += 1;
                if off[i] <= 3 {
                    break;
                }
                off[i] = -2;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
    }
    if (a - b).norm() <= 1.5 * mesh {
        edges.push((ia, ib));
    }

    let weights: Vec<f64> = edges
        .par_iter()
        .map(|&(u, v)| segment_length(patch, &nodes[u], &nodes[v], 4))
        .collect();
    let mut graph: UnGraph<(), f64> = UnGraph::with_capacity(nodes.len(), edges.len());
    for _ in 0..nodes.len() {
        graph.add_node(());
    }
    for (&(u, v), w) in edges.iter().zip(weights) {
        if u != v {
            graph.add_edge(NodeIndex::new(u), NodeIndex::new(v), w);
        }
    }
    let goal = NodeIndex::new(ib);
    let (_, route) = astar(&graph, NodeIndex::new(ia), |n| n == goal, |e| *e.weight(), |_| 0.0)
        .ok_or(Error::Disconnected { mesh })?;
    let mut pts: Vec<Vector> = route.into_iter().map(|n| nodes[n.index()].clone()).collect();
    pts.dedup_by(|x, y| (&*x - &*y).norm() == 0.0);
    let mut pts = merge_collinear(pts);
    shorten(patch, &mut pts, mesh);
    let pts = drop_coincident(pts);
    if pts.len() < 3 {
        return Ok((polyline_length(patch, &[a.clone(), b.clone()], mesh), PolylinePath::segment(a.clone(), b.clone())?));
    }

    // The domain is convex, so the straight segment is always admissible.
    let straight = polyline_length(patch, &[a.clone(), b.clone()], mesh);
    let refined = polyline_length(patch, &pts, mesh);
    if straight <= refined {
        return Ok((straight, PolylinePath::segment(a.clone(), b.clone())?));
    }
    Ok((refined, PolylinePath::new(pts)?))
}

/// Remove vertices that shortening moved onto a neighbour, keeping the
/// exact endpoints.
fn drop_coincident(pts: Vec<Vector>) -> Vec<Vector> {
    let last = pts.len() - 1;
    let mut out: Vec<Vector> = Vec::with_capacity(pts.len());
    for (i, p) in pts.into_iter().enumerate() {
        let same = |q: &Vector| (q - &p).norm() <= 1e-14 * (1.0 + p.norm());
        match out.last() {
            Some(q) if same(q) => {
                if i == last && out.len() > 1 {
                    out.pop();
                    out.push(p);
                }
            }
            _ => out.push(p),
        }
    }
    out
}

fn merge_collinear(pts: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.len() >= 2 {
            let a = &out[out.len() - 2];
            let b = &out[out.len() - 1];
            let d1 = b - a;
            let d2 = &p - b;
            let cos = d1.dot(&d2) / (d1.norm() * d2.norm());
            if cos > 1.0 - 1e-12 {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// Vertex-perturbation descent on interior vertices.
fn shorten(patch: &FinslerPatch, pts: &mut [Vector], mesh: f64) {
    let dim = patch.dim();
    if pts.len() < 3 {
        return;
    }
    let local = |pts: &[Vector], i: usize, p: &Vector| -> f64 {
        let sub = |a: &Vector, b: &Vector| ((a - b).norm() / mesh * 4.0).ceil().clamp(4.0, 4096.0) as usize;
        segment_length(patch, &pts[i - 1], p, sub(&pts[i - 1], p)) + segment_length(patch, p, &pts[i + 1], sub(p, &pts[i + 1]))
    };
    let mut step = 0.5 * mesh;
    for _ in 0..40 {
        let mut improved = false;
        for i in 1..pts.len() - 1 {
            let mut best = local(pts, i, &pts[i]);
            for k in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut q = pts[i].clone();
                    q[k] += sign * step;
                    if !patch.contains(&q) {
                        continue;
                    }
                    let l = local(pts, i, &q);
                    if l < best - 1e-15 {
                        best = l;
                        pts[i] = q;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 * mesh {
                break;
            }
        }
    }
}

/// Distance at `mesh` together with the observed change from `2·mesh`,
/// the solver's empirical error indicator.
pub fn distance_with_error(patch: &FinslerPatch, a: &Vector, b: &Vector, mesh: f64) -> Result<(f64, f64, PolylinePath)> {
    let (coarse, _) = finsler_distance(patch, a, b, 2.0 * mesh)?;
    let (fine, path) = finsler_distance(patch, a, b, mesh)?;
    Ok((fine, (coarse - fine).abs(), path))
}
