//! Clarke generalized Jacobians, global invertibility criteria and
//! path-lifting inversion for Lipschitz maps `ℝⁿ → ℝⁿ`.
//!
//! * [`funcorpus`]: piecewise-affine and black-box Lipschitz maps, spec files
//!   and the bundled corpus.
//! * [`clarke`]: generalized differentials as matrix polytopes and their
//!   calculus (norms, co-norms, rank, inverses, chain rule, charts).
//! * [`finsler`]: Finsler patches, path lengths, distances and scalar
//!   derivatives.
//! * [`criteria`]: maximal rank, Hadamard and spectral integral conditions,
//!   eigenvalue-disc and half-plane conditions, with certificates.
//! * [`inverter`]: local inverse checks, path lifting, injectivity probes and
//!   the inverse-differential check.

pub mod clarke;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod finsler;
pub mod funcorpus;
pub mod inverter;
pub mod linalg;
pub mod region;
pub mod sampling;

pub use error::{Error, Result};
