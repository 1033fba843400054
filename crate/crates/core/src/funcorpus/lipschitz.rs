//! Black-box locally Lipschitz maps given by point evaluation and an
//! optional almost-everywhere Jacobian oracle.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcorpus::expr::Expression;
use crate::funcorpus::pwa::{Polyhedron, FACET_TOL};
use crate::linalg::{Mat, Vector};
use crate::sampling;

pub type EvalFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&Vector) -> Mat + Send + Sync>;

/// Expression sources kept for serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionSource {
    pub components: Vec<String>,
    pub jacobian: Option<Vec<Vec<String>>>,
}

#[derive(Clone)]
pub struct LipschitzMap {
    dim_in: usize,
    dim_out: usize,
    eval: EvalFn,
    jacobian: Option<JacobianFn>,
    lipschitz_bound: Option<f64>,
    smooth: bool,
    domain: Polyhedron,
    source: Option<ExpressionSource>,
}

impl fmt::Debug for LipschitzMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzMap")
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("has_jacobian", &self.jacobian.is_some())
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("smooth", &self.smooth)
            .field("source", &self.source)
            .finish()
    }
}

impl LipschitzMap {
    pub fn new(dim_in: usize, dim_out: usize, f: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        LipschitzMap {
            dim_in,
            dim_out,
            eval: Arc::new(f),
            jacobian: None,
            lipschitz_bound: None,
            smooth: false,
            domain: Polyhedron::whole(dim_in),
            source: None,
        }
    }

    /// Map given by one expression per output component in `x0, x1, …`.
    pub fn from_expressions(dim_in: usize, components: &[String], jacobian: Option<&[Vec<String>]>) -> Result<Self> {
        Self::from_expressions_in(dim_in, components, jacobian, 'x')
    }

    pub(crate) fn from_expressions_in(
        dim_in: usize,
        components: &[String],
        jacobian: Option<&[Vec<String>]>,
        prefix: char,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::parse("components", "at least one component expression is required"));
        }
        let exprs = components
            .iter()
            .map(|c| Expression::parse(c, prefix, dim_in))
            .collect::<Result<Vec<_>>>()?;
        let dim_out = exprs.len();
        let mut map = LipschitzMap::new(dim_in, dim_out, move |x| Vector::from_fn(exprs.len(), |i, _| exprs[i].eval(x)));
        if let Some(rows) = jacobian {
            if rows.len() != dim_out || rows.iter().any(|r| r.len() != dim_in) {
                return Err(Error::parse(
                    "jacobian",
                    format!("expected a {dim_out}x{dim_in} array of expressions"),
                ));
            }
            let cells = rows
                .iter()
                .map(|r| r.iter().map(|c| Expression::parse(c, prefix, dim_in)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            map = map.with_jacobian(move |x| Mat::from_fn(cells.len(), cells[0].len(), |i, j| cells[i][j].eval(x)));
        }
        map.source = Some(ExpressionSource {
            components: components.to_vec(),
            jacobian: jacobian.map(|j| j.to_vec()),
        });
        Ok(map)
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vector) -> Mat + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_lipschitz_bound(mut self, bound: f64) -> Self {
        self.lipschitz_bound = Some(bound);
        self
    }

    /// Declare the map C¹, so its Clarke differential is `{df(x)}`.
    pub fn with_smooth(mut self, smooth: bool) -> Self {
        self.smooth = smooth;
        self
    }

    pub fn with_domain(mut self, domain: Polyhedron) -> Self {
        self.domain = domain;
        self
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz_bound
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn source(&self) -> Option<&ExpressionSource> {
        self.source.as_ref()
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        self.domain.contains(x, FACET_TOL)
    }

    /// Evaluation without the domain check (used by finite differences).
    pub fn eval_raw(&self, x: &Vector) -> Vector {
        (self.eval)(x)
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "evaluation point",
                expected: self.dim_in,
                found: x.len(),
            });
        }
        if !self.in_domain(x) {
            return Err(Error::PointOutsideDomain { point: x.iter().copied().collect() });
        }
        let y = (self.eval)(x);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::PointOutsideDomain { point: x.iter().copied().collect() });
        }
        Ok(y)
    }

    /// Oracle Jacobian, when one was supplied.
    pub fn oracle_jacobian(&self, x: &Vector) -> Option<Mat> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    /// Central finite-difference Jacobian with step `h`.
    pub fn fd_jacobian_with_step(&self, x: &Vector, h: f64) -> Mat {
        let mut jac = Mat::zeros(self.dim_out, self.dim_in);
        for j in 0..self.dim_in {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = ((self.eval)(&xp) - (self.eval)(&xm)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        jac
    }

    /// Central finite-difference Jacobian, step `1e-6·max(1, |x|)`.
    pub fn fd_jacobian(&self, x: &Vector) -> Mat {
        self.fd_jacobian_with_step(x, fd_step(x))
    }

    /// Jacobian at a (presumed) differentiability point: the oracle when
    /// available, otherwise finite differences accepted only when the
    /// forward, backward and half-step estimates agree. Near a kink the
    /// step is shrunk (down to 1e-4 of the default) before giving up.
    pub fn jacobian_at(&self, x: &Vector) -> Option<Mat> {
        if let Some(j) = self.oracle_jacobian(x) {
            return j.iter().all(|v| v.is_finite()).then_some(j);
        }
        let fx = (self.eval)(x);
        [1.0, 1e-2, 1e-4]
            .into_iter()
            .find_map(|scale| self.consistent_fd(x, &fx, fd_step(x) * scale))
    }

    fn consistent_fd(&self, x: &Vector, fx: &Vector, h: f64) -> Option<Mat> {
        let mut forward = Mat::zeros(self.dim_out, self.dim_in);
        let mut backward = Mat::zeros(self.dim_out, self.dim_in);
        for j in 0..self.dim_in {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            forward.set_column(j, &(((self.eval)(&xp) - fx) / h));
            backward.set_column(j, &((fx - (self.eval)(&xm)) / h));
        }
        let central = (&forward + &backward) * 0.5;
        let half = self.fd_jacobian_with_step(x, h / 2.0);
        let scale = 1.0 + central.norm();
        let consistent = (&forward - &backward).norm() <= 1e-4 * scale && (&central - &half).norm() <= 1e-4 * scale;
        (consistent && central.iter().all(|v| v.is_finite())).then_some(central)
    }

    /// The shifted map `x ↦ f(x) − t x`.
    pub fn shifted(&self, t: f64) -> LipschitzMap {
        let f = self.eval.clone();
        let mut out = LipschitzMap {
            eval: Arc::new(move |x: &Vector| f(x) - x * t),
            jacobian: None,
            lipschitz_bound: self.lipschitz_bound.map(|k| k + t.abs()),
            source: None,
            ..self.clone()
        };
        if let Some(j) = self.jacobian.clone() {
            out.jacobian = Some(Arc::new(move |x: &Vector| {
                let mut m = j(x);
                for i in 0..m.nrows().min(m.ncols()) {
                    m[(i, i)] -= t;
                }
                m
            }));
        }
        out
    }

    /// The conjugated map `z ↦ Q f(P⁻¹ z)` in linear charts `P` (source) and
    /// `Q` (target).
    pub fn conjugate_linear(&self, p: &Mat, q: &Mat) -> Result<LipschitzMap> {
        let p_inv = crate::linalg::inverse(p)?;
        let f = self.eval.clone();
        let (pi, qq) = (p_inv.clone(), q.clone());
        let scale = crate::linalg::sigma_max(q) * crate::linalg::sigma_max(&p_inv);
        let mut out = LipschitzMap {
            eval: Arc::new(move |z: &Vector| &qq * f(&(&pi * z))),
            jacobian: None,
            lipschitz_bound: self.lipschitz_bound.map(|k| k * scale),
            source: None,
            domain: self.domain.transformed(&p_inv),
            ..self.clone()
        };
        if let Some(j) = self.jacobian.clone() {
            let (pi, qq) = (p_inv, q.clone());
            out.jacobian = Some(Arc::new(move |z: &Vector| &qq * j(&(&pi * z)) * &pi));
        }
        Ok(out)
    }

    /// Box used for validation sampling: the domain's bounding box when the
    /// domain is a box, otherwise `[-5, 5]ⁿ`.
    pub fn sampling_box(&self) -> (Vector, Vector) {
        domain_box(&self.domain, self.dim_in)
    }

    /// Sampled check of the oracle Jacobian and of the declared Lipschitz bound.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = sampling::seeded(seed);
        let (lo, hi) = self.sampling_box();
        let mut mismatches = 0usize;
        let mut checked = 0usize;
        for _ in 0..samples {
            let x = sampling::uniform_in_box(&mut rng, &lo, &hi);
            let y = sampling::uniform_in_box(&mut rng, &lo, &hi);
            if !self.in_domain(&x) || !self.in_domain(&y) {
                continue;
            }
            let (fx, fy) = (self.eval(&x)?, self.eval(&y)?);
            if let Some(k) = self.lipschitz_bound {
                let q = (&fx - &fy).norm() / (&x - &y).norm();
                if q > k + 1e-9 {
                    return Err(Error::Validation(format!(
                        "difference quotient {q:.6} exceeds the declared Lipschitz bound {k}"
                    )));
                }
            }
            if let Some(j) = self.oracle_jacobian(&x) {
                checked += 1;
                let fd = self.fd_jacobian(&x);
                if (&fd - &j).norm() > 1e-5 * (1.0 + j.norm()) {
                    mismatches += 1;
                }
            }
        }
        // A kink may land within one finite-difference step of a sample.
        if checked > 0 && mismatches * 20 > checked {
            return Err(Error::Validation(format!(
                "Jacobian oracle disagrees with finite differences at {mismatches} of {checked} points"
            )));
        }
        Ok(())
    }
}

pub(crate) fn fd_step(x: &Vector) -> f64 {
    1e-6 * x.norm().max(1.0)
}

/// Bounding box of a polyhedron made only of axis-aligned half-spaces,
/// defaulting to `[-5, 5]` along unbounded coordinates.
pub(crate) fn domain_box(domain: &Polyhedron, dim: usize) -> (Vector, Vector) {
    let mut lo = Vector::from_element(dim, -5.0);
    let mut hi = Vector::from_element(dim, 5.0);
    for h in domain.halfspaces() {
        let nz: Vec<usize> = (0..dim).filter(|&i| h.normal[i] != 0.0).collect();
        if let [i] = nz[..] {
            let bound = h.offset / h.normal[i];
            if h.normal[i] > 0.0 {
                hi[i] = hi[i].min(bound);
                if lo[i] >= hi[i] {
                    lo[i] = hi[i] - 10.0;
                }
            } else {
                lo[i] = lo[i].max(bound);
                if hi[i] <= lo[i] {
                    hi[i] = lo[i] + 10.0;
                }
            }
        }
    }
    (lo, hi)
}
