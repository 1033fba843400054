//! The function model: piecewise-affine maps, black-box Lipschitz maps, the
//! bundled test corpus and the function-spec file format.

mod corpus;
mod expr;
mod lipschitz;
mod pwa;
mod specfile;

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

pub use corpus::{
    bundled_corpus, load_corpus, CorpusEntry, DiscSettings, EntrySettings, InverseCheck, KnownClarke, BUNDLED, CORPUS_DIR_VAR,
};
pub use expr::Expression;
pub use lipschitz::{ExpressionSource, LipschitzMap};
pub use pwa::{active_pieces, eval_pwa, AffinePiece, HalfSpace, Polyhedron, PwaMap, FACET_TOL};
pub use specfile::{parse_radii, parse_spec, serialize_entry};

pub(crate) use lipschitz::domain_box;
pub(crate) use pwa::next_combination;

/// Either function class, behind one evaluation interface.
#[derive(Debug, Clone)]
pub enum Map {
    Pwa(PwaMap),
    Lipschitz(LipschitzMap),
}

impl Map {
    pub fn dim_in(&self) -> usize {
        match self {
            Map::Pwa(m) => m.dim_in(),
            Map::Lipschitz(m) => m.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            Map::Pwa(m) => m.dim_out(),
            Map::Lipschitz(m) => m.dim_out(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.dim_in() == self.dim_out()
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        match self {
            Map::Pwa(m) => m.eval(x),
            Map::Lipschitz(m) => m.eval(x),
        }
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        match self {
            Map::Pwa(m) => m.in_domain(x),
            Map::Lipschitz(m) => m.in_domain(x),
        }
    }

    pub fn domain(&self) -> &Polyhedron {
        match self {
            Map::Pwa(m) => m.domain(),
            Map::Lipschitz(m) => m.domain(),
        }
    }

    /// The shift family member `f_t(x) = f(x) − t x`.
    pub fn shifted(&self, t: f64) -> Map {
        match self {
            Map::Pwa(m) => Map::Pwa(m.shifted(t)),
            Map::Lipschitz(m) => Map::Lipschitz(m.shifted(t)),
        }
    }

    /// The map expressed in linear charts: `z ↦ Q f(P⁻¹ z)`.
    pub fn conjugate_linear(&self, p: &Mat, q: &Mat) -> Result<Map> {
        Ok(match self {
            Map::Pwa(m) => Map::Pwa(m.conjugate_linear(p, q)?),
            Map::Lipschitz(m) => Map::Lipschitz(m.conjugate_linear(p, q)?),
        })
    }

    /// Declared or structural global Lipschitz constant, if known.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            Map::Pwa(m) => Some(m.lipschitz_constant()),
            Map::Lipschitz(m) => m.lipschitz_bound(),
        }
    }

    pub fn as_pwa(&self) -> Option<&PwaMap> {
        match self {
            Map::Pwa(m) => Some(m),
            Map::Lipschitz(_) => None,
        }
    }

    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        match self {
            Map::Pwa(m) => m.validate(samples, seed),
            Map::Lipschitz(m) => m.validate(samples, seed),
        }
    }

    pub(crate) fn require_square(&self, context: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected: self.dim_in(),
                found: self.dim_out(),
            })
        }
    }
}

impl From<PwaMap> for Map {
    fn from(m: PwaMap) -> Self {
        Map::Pwa(m)
    }
}

impl From<LipschitzMap> for Map {
    fn from(m: LipschitzMap) -> Self {
        Map::Lipschitz(m)
    }
}
