//! Finsler patches: chart domains carrying a continuous field of norms.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::finsler::norm::Norm;
use crate::funcorpus::{domain_box, Expression, Polyhedron, FACET_TOL};
use crate::linalg::Vector;
use crate::sampling;

/// A continuous real function on the chart domain.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<dyn Fn(&Vector) -> f64 + Send + Sync>,
    source: Option<String>,
}

impl ScalarField {
    pub fn new(f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            f: Arc::new(f),
            source: None,
        }
    }

    /// Field given by an expression in `x0, x1, …`.
    pub fn parse(source: &str, dim: usize) -> Result<Self> {
        let e = Expression::parse(source, 'x', dim)?;
        Ok(ScalarField {
            f: Arc::new(move |x| e.eval(x)),
            source: Some(source.to_string()),
        })
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({:?})", self.source)
    }
}

/// A position-dependent norm `x ↦ ‖·‖ₓ`.
#[derive(Clone)]
pub enum NormField {
    Constant(Norm),
    /// `‖v‖ₓ = factor(x) · ‖v‖_base`.
    Conformal { factor: ScalarField, base: Norm },
    Custom(Arc<dyn Fn(&Vector) -> Norm + Send + Sync>),
}

impl fmt::Debug for NormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormField::Constant(n) => write!(f, "Constant({n:?})"),
            NormField::Conformal { factor, base } => write!(f, "Conformal({factor:?}, {base:?})"),
            NormField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl NormField {
    pub fn at(&self, x: &Vector) -> Norm {
        match self {
            NormField::Constant(n) => n.clone(),
            NormField::Conformal { factor, base } => Norm::Scaled(factor.eval(x), Box::new(base.clone())),
            NormField::Custom(f) => f(x),
        }
    }

    /// Fast path for `‖v‖ₓ` that avoids cloning the norm.
    pub fn eval(&self, x: &Vector, v: &Vector) -> f64 {
        match self {
            NormField::Constant(n) => n.eval(v),
            NormField::Conformal { factor, base } => factor.eval(x) * base.eval(v),
            NormField::Custom(f) => f(x).eval(v),
        }
    }
}

/// An open chart domain (box or polyhedron) with a norm field.
#[derive(Debug, Clone)]
pub struct FinslerPatch {
    domain: Polyhedron,
    field: NormField,
    /// Lipschitz constant `L` of `log ‖v‖ₓ` in `x`, so `ω(δ) = e^{Lδ} − 1`.
    modulus: Option<f64>,
}

impl FinslerPatch {
    pub fn new(domain: Polyhedron, field: NormField) -> Self {
        FinslerPatch {
            domain,
            field,
            modulus: None,
        }
    }

    /// ℝⁿ with the Euclidean norm everywhere.
    pub fn euclidean(dim: usize) -> Self {
        FinslerPatch::new(Polyhedron::whole(dim), NormField::Constant(Norm::Euclidean))
    }

    pub fn with_modulus(mut self, lipschitz_log: f64) -> Self {
        self.modulus = Some(lipschitz_log);
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn field(&self) -> &NormField {
        &self.field
    }

    pub fn modulus(&self) -> Option<f64> {
        self.modulus
    }

    /// Continuity modulus `ω(δ)` bounding `‖·‖_y / ‖·‖_x − 1` for `|x − y| ≤ δ`.
    pub fn omega(&self, delta: f64) -> Option<f64> {
        self.modulus.map(|l| (l * delta).exp_m1())
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.domain.contains(x, FACET_TOL)
    }

    pub fn norm_at(&self, x: &Vector) -> Norm {
        self.field.at(x)
    }

    pub fn norm(&self, x: &Vector, v: &Vector) -> f64 {
        self.field.eval(x, v)
    }

    /// Largest radius whose closed chart ball around `x` stays in the domain.
    pub fn horizon(&self, x: &Vector) -> f64 {
        self.domain.inner_distance(x)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.field, NormField::Constant(Norm::Euclidean))
    }

    /// Sampled check of the norm axioms and of the declared modulus.
    pub fn check(&self, samples: usize, seed: u64) -> Result<()> {
        let dim = self.dim();
        let (lo, hi) = domain_box(&self.domain, dim);
        let mut rng = sampling::seeded(seed);
        for k in 0..samples {
            let x = sampling::uniform_in_box(&mut rng, &lo, &hi);
            if !self.contains(&x) {
                continue;
            }
            self.norm_at(&x).check(dim, 8, seed.wrapping_add(k as u64))?;
            if let Some(l) = self.modulus {
                let delta: f64 = rng.random_range(1e-4..1e-1);
                let y = &x + sampling::unit_direction(&mut rng, dim) * delta;
                if !self.contains(&y) {
                    continue;
                }
                let eps = (l * delta).exp_m1();
                let v = sampling::unit_direction(&mut rng, dim);
                let ratio = self.norm(&y, &v) / self.norm(&x, &v);
                if ratio > (1.0 + eps) * (1.0 + 1e-12) || ratio < 1.0 / ((1.0 + eps) * (1.0 + 1e-12)) {
                    return Err(Error::Validation(format!(
                        "norms at distance {delta:.3e} differ by factor {ratio:.6}, beyond the declared modulus"
                    )));
                }
            }
        }
        Ok(())
    }
}
