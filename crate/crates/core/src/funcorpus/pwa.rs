//! Piecewise-affine maps: affine selection functions over polyhedral cells
//! stored in H-representation.


use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::sampling;

/// Absolute tolerance for facet membership.
pub const FACET_TOL: f64 = 1e-10;

/// The half-space `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vector,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vector, offset: f64) -> Self {
        HalfSpace { normal, offset }
    }

    /// Signed Euclidean distance past the bounding hyperplane (positive outside).
    pub fn violation(&self, x: &Vector) -> f64 {
        (self.normal.dot(x) - self.offset) / self.normal.norm()
    }

    /// Same half-space expressed in coordinates `z = P x`: `⟨P⁻ᵀ a, z⟩ ≤ c`.
    pub fn transformed(&self, p_inv: &Mat) -> HalfSpace {
        HalfSpace {
            normal: p_inv.transpose() * &self.normal,
            offset: self.offset,
        }
    }
}

/// A polyhedron given as a finite intersection of half-spaces; the empty list
/// is the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
}

impl Polyhedron {
    pub fn whole(dim: usize) -> Self {
        Polyhedron {
            dim,
            halfspaces: Vec::new(),
        }
    }

    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "half-space normal",
                    expected: dim,
                    found: h.normal.len(),
                });
            }
            if !(h.normal.norm() > 0.0) || !h.offset.is_finite() {
                return Err(Error::Validation("half-space with zero normal or non-finite offset".into()));
            }
        }
        Ok(Polyhedron { dim, halfspaces })
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`.
    pub fn from_box(lo: &Vector, hi: &Vector) -> Result<Self> {
        let n = lo.len();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            hs.push(HalfSpace::new(e.clone(), hi[i]));
            hs.push(HalfSpace::new(-e, -lo[i]));
        }
        Polyhedron::new(n, hs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn is_whole(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn max_violation(&self, x: &Vector) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim && self.halfspaces.iter().all(|h| h.violation(x) <= tol)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Polyhedron { dim: self.dim, halfspaces: hs }
    }

    pub fn transformed(&self, p_inv: &Mat) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            halfspaces: self.halfspaces.iter().map(|h| h.transformed(p_inv)).collect(),
        }
    }

    /// Euclidean distance from an interior point to the boundary (∞ for the
    /// whole space, 0 or negative when outside).
    pub fn inner_distance(&self, x: &Vector) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| -h.violation(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest inscribed ball inside the box `[-bound, bound]ⁿ`, found by
    /// enumerating the vertices of the lifted linear program
    /// `max r s.t. ⟨aᵢ, x⟩ + r‖aᵢ‖ ≤ cᵢ`.
    pub fn chebyshev_center(&self, bound: f64) -> Option<(Vector, f64)> {
        let n = self.dim;
        let mut rows: Vec<(Vector, f64)> = Vec::new();
        for h in &self.halfspaces {
            let mut r = Vector::zeros(n + 1);
            r.rows_mut(0, n).copy_from(&h.normal);
            r[n] = h.normal.norm();
            rows.push((r, h.offset));
        }
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut r = Vector::zeros(n + 1);
                r[i] = sign;
                r[n] = 1.0;
                rows.push((r, bound));
            }
        }
        let mut cap = Vector::zeros(n + 1);
        cap[n] = 1.0;
        rows.push((cap, bound));

        let m = rows.len();
        let mut best: Option<(Vector, f64)> = None;
        let mut idx: Vec<usize> = (0..=n).collect();
        loop {
            let mut a = Mat::zeros(n + 1, n + 1);
            let mut c = Vector::zeros(n + 1);
            for (k, &i) in idx.iter().enumerate() {
                a.set_row(k, &rows[i].0.transpose());
                c[k] = rows[i].1;
            }
            if let Some(sol) = a.lu().solve(&c) {
                let feasible = sol.iter().all(|v| v.is_finite())
                    && rows.iter().all(|(r, o)| r.dot(&sol) <= o + 1e-9 * (1.0 + o.abs()));
                if feasible {
                    let radius = sol[n];
                    if best.as_ref().map_or(true, |(_, r)| radius > *r) {
                        best = Some((sol.rows(0, n).into_owned(), radius));
                    }
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
        best
    }

    /// Full-dimensional when it contains a ball of radius above 1e-10.
    pub fn is_full_dimensional(&self, bound: f64) -> bool {
        if self.halfspaces.is_empty() {
            return true;
        }
        self.chebyshev_center(bound).is_some_and(|(_, r)| r > 1e-10)
    }

    /// Euclidean projection of `x` onto the polyhedron and its distance,
    /// computed by enumerating active sets of at most `dim` constraints.
    pub fn project(&self, x: &Vector) -> Option<(Vector, f64)> {
        if self.contains(x, 0.0) {
            return Some((x.clone(), 0.0));
        }
        let h = self.halfspaces.len();
        let mut best: Option<(Vector, f64)> = None;
        for size in 1..=self.dim.min(h) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let rows: Vec<Vector> = idx.iter().map(|&i| self.halfspaces[i].normal.clone()).collect();
                let offs: Vec<f64> = idx.iter().map(|&i| self.halfspaces[i].offset).collect();
                if let Some(p) = linalg::project_onto_affine(&rows, &offs, x) {
                    if self.contains(&p, 1e-9) {
                        let d = (&p - x).norm();
                        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
                            best = Some((p, d));
                        }
                    }
                }
                if !next_combination(&mut idx, h) {
                    break;
                }
            }
        }
        best
    }
}

/// Advance a sorted index combination of `0..m`; false when exhausted.
pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    if k == 0 || k > m {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One affine selection function `x ↦ A x + b` valid on its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub matrix: Mat,
    pub offset: Vector,
    pub cell: Polyhedron,
}

impl AffinePiece {
    pub fn new(matrix: Mat, offset: Vector, cell: Polyhedron) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::DimensionMismatch {
                context: "piece offset",
                expected: matrix.nrows(),
                found: offset.len(),
            });
        }
        if matrix.ncols() != cell.dim() {
            return Err(Error::DimensionMismatch {
                context: "piece cell",
                expected: matrix.ncols(),
                found: cell.dim(),
            });
        }
        Ok(AffinePiece { matrix, offset, cell })
    }

    pub fn value(&self, x: &Vector) -> Vector {
        &self.matrix * x + &self.offset
    }
}

/// A continuous piecewise-affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct PwaMap {
    pieces: Vec<AffinePiece>,
    domain: Polyhedron,
}

impl PwaMap {
    /// Builds the map and checks the structural invariants: consistent
    /// dimensions and nonempty full-dimensional cells. Coverage and
    /// continuity are sampled by [`PwaMap::validate`].
    pub fn new(pieces: Vec<AffinePiece>, domain: Polyhedron) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::Validation("piecewise-affine map needs at least one piece".into()))?;
        let (n, m) = first.matrix.shape();
        if domain.dim() != m {
            return Err(Error::DimensionMismatch {
                context: "map domain",
                expected: m,
                found: domain.dim(),
            });
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.matrix.shape() != (n, m) {
                return Err(Error::Validation(format!("piece {i} has shape {:?}, expected {:?}", p.matrix.shape(), (n, m))));
            }
            if !p.cell.intersect(&domain).is_full_dimensional(1e6) {
                return Err(Error::Validation(format!("cell of piece {i} is empty or not full-dimensional")));
            }
        }
        Ok(PwaMap { pieces, domain })
    }

    pub fn affine(matrix: Mat, offset: Vector) -> Result<Self> {
        let m = matrix.ncols();
        PwaMap::new(vec![AffinePiece::new(matrix, offset, Polyhedron::whole(m))?], Polyhedron::whole(m))
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn dim_in(&self) -> usize {
        self.pieces[0].matrix.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.pieces[0].matrix.nrows()
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        self.domain.contains(x, FACET_TOL)
    }

    /// Every piece whose cell contains `x` up to `tol` (never below the facet tolerance).
    pub fn active_pieces(&self, x: &Vector, tol: f64) -> Result<Vec<usize>> {
        self.check_dim(x)?;
        if !self.in_domain(x) {
            return Err(Error::PointOutsideDomain { point: x.iter().copied().collect() });
        }
        let tol = tol.max(FACET_TOL);
        let active: Vec<usize> = (0..self.pieces.len())
            .filter(|&i| self.pieces[i].cell.contains(x, tol))
            .collect();
        if active.is_empty() {
            return Err(Error::PointOutsideDomain { point: x.iter().copied().collect() });
        }
        Ok(active)
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let i = self.active_pieces(x, FACET_TOL)?[0];
        Ok(self.pieces[i].value(x))
    }

    /// Piece whose cell contains `x + ε d` for a tiny ε, i.e. the piece the
    /// map follows when leaving `x` in direction `d`.
    pub fn piece_in_direction(&self, x: &Vector, d: &Vector) -> Result<usize> {
        let active = self.active_pieces(x, FACET_TOL)?;
        let dn = d.norm();
        if dn == 0.0 || active.len() == 1 {
            return Ok(active[0]);
        }
        for eps in [1e-7, 1e-5, 1e-3] {
            let probe = x + d * (eps * (1.0 + x.norm()) / dn);
            if let Some(&i) = active.iter().find(|&&i| self.pieces[i].cell.contains(&probe, 0.0)) {
                return Ok(i);
            }
        }
        // Fall back to the least-violated active cell.
        let probe = x + d * (1e-7 * (1.0 + x.norm()) / dn);
        Ok(*active
            .iter()
            .min_by(|&&a, &&b| {
                self.pieces[a]
                    .cell
                    .max_violation(&probe)
                    .total_cmp(&self.pieces[b].cell.max_violation(&probe))
            })
            .expect("nonempty active set"))
    }

    /// Global Lipschitz constant `maxᵢ ‖Aᵢ‖₂`.
    pub fn lipschitz_constant(&self) -> f64 {
        self.pieces.iter().map(|p| linalg::sigma_max(&p.matrix)).fold(0.0, f64::max)
    }

    /// The shifted map `x ↦ f(x) − t x` (requires a square map).
    pub fn shifted(&self, t: f64) -> PwaMap {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut a = p.matrix.clone();
                for i in 0..a.nrows().min(a.ncols()) {
                    a[(i, i)] -= t;
                }
                AffinePiece {
                    matrix: a,
                    offset: p.offset.clone(),
                    cell: p.cell.clone(),
                }
            })
            .collect();
        PwaMap {
            pieces,
            domain: self.domain.clone(),
        }
    }

    /// The conjugated map `z ↦ Q f(P⁻¹ z)` in the linear charts `φ = P` on
    /// the source and `ψ = Q` on the target.
    pub fn conjugate_linear(&self, p: &Mat, q: &Mat) -> Result<PwaMap> {
        let p_inv = linalg::inverse(p).map_err(|_| Error::SingularChart {
            condition: linalg::condition_number(p),
        })?;
        if linalg::condition_number(q) > 1e12 {
            return Err(Error::SingularChart {
                condition: linalg::condition_number(q),
            });
        }
        let pieces = self
            .pieces
            .iter()
            .map(|pc| AffinePiece {
                matrix: q * &pc.matrix * &p_inv,
                offset: q * &pc.offset,
                cell: pc.cell.transformed(&p_inv),
            })
            .collect();
        Ok(PwaMap {
            pieces,
            domain: self.domain.transformed(&p_inv),
        })
    }

    /// Distinct bounding hyperplanes of all cells and the domain, normalized.
    pub fn hyperplanes(&self) -> Vec<HalfSpace> {
        let mut out: Vec<HalfSpace> = Vec::new();
        let all = self
            .pieces
            .iter()
            .flat_map(|p| p.cell.halfspaces().iter())
            .chain(self.domain.halfspaces().iter());
        for h in all {
            let n = h.normal.norm();
            let mut u = &h.normal / n;
            let mut c = h.offset / n;
            // canonical orientation: first nonzero coordinate positive
            if let Some(v) = u.iter().find(|v| v.abs() > 1e-14) {
                if *v < 0.0 {
                    u = -u;
                    c = -c;
                }
            }
            let dup = out
                .iter()
                .any(|o| (&o.normal - &u).norm() < 1e-12 && (o.offset - c).abs() < 1e-12);
            if !dup {
                out.push(HalfSpace::new(u, c));
            }
        }
        out
    }

    /// Sampled check of coverage and facet continuity.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = sampling::seeded(seed);
        let scale = self.bounding_scale();
        let lo = Vector::from_element(self.dim_in(), -scale);
        let hi = Vector::from_element(self.dim_in(), scale);
        for _ in 0..samples {
            let x = sampling::uniform_in_box(&mut rng, &lo, &hi);
            if self.in_domain(&x) && self.active_pieces(&x, FACET_TOL).is_err() {
                return Err(Error::Validation(format!("pieces do not cover the domain at {:?}", x.as_slice())));
            }
        }
        for (i, piece) in self.pieces.iter().enumerate() {
            for h in piece.cell.halfspaces() {
                for _ in 0..samples.div_ceil(8).max(4) {
                    let raw = sampling::uniform_in_box(&mut rng, &lo, &hi);
                    let Some(x) = linalg::project_onto_affine(&[h.normal.clone()], &[h.offset], &raw) else {
                        continue;
                    };
                    if !piece.cell.contains(&x, 1e-9) || !self.in_domain(&x) {
                        continue;
                    }
                    let fi = piece.value(&x);
                    for (j, other) in self.pieces.iter().enumerate() {
                        if j != i && other.cell.contains(&x, 1e-9) {
                            let gap = (&fi - other.value(&x)).norm();
                            if gap > 1e-12 * (1.0 + x.norm()) * (1.0 + self.lipschitz_constant()) {
                                return Err(Error::Validation(format!(
                                    "pieces {i} and {j} disagree by {gap:.3e} on a shared facet at {:?}",
                                    x.as_slice()
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// A box half-width that comfortably contains every hyperplane anchor.
    fn bounding_scale(&self) -> f64 {
        let m = self
            .hyperplanes()
            .iter()
            .map(|h| h.offset.abs())
            .fold(0.0, f64::max);
        2.0 * m + 10.0
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim_in() {
            return Err(Error::DimensionMismatch {
                context: "evaluation point",
                expected: self.dim_in(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Evaluate a piecewise-affine map.
pub fn eval_pwa(map: &PwaMap, x: &Vector) -> Result<Vector> {
    map.eval(x)
}

/// Indices of the pieces active at `x`.
pub fn active_pieces(map: &PwaMap, x: &Vector, tol: f64) -> Result<Vec<usize>> {
    map.active_pieces(x, tol)
}
