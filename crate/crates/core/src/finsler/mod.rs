//! Finsler patches, path lengths, discretized Finsler distances and the
//! scalar derivatives D± of maps between patches.

mod derivative;
mod norm;
mod patch;
mod path;

pub use derivative::{
    sampled_lipschitz, scalar_derivatives, sup_norm_estimate, RadiusProfile, ScalarDerivativeEstimate, SupNormEstimate,
};
pub use norm::{co_norm, operator_norm, Norm, NORM_RESTARTS};
pub use patch::{FinslerPatch, NormField, ScalarField};
pub use path::{distance_with_error, finsler_distance, path_length, segment_distance, PolylinePath};
