//! Sufficient conditions for global invertibility and their certificates.

mod certificate;
mod hadamard;
mod profile;
mod rank;
mod spectral;

pub use certificate::{mat_rows, to_json, Certificate, Criterion, Verdict, Witness};
pub use hadamard::{
    fit_tail, hadamard_verdict, profile_integral, spectral_constants, spectral_verdict, SpectralConstants, TailFit,
};
pub use profile::{radial_profile, ProfileKind, RadialProfile};
pub use rank::check_maximal_rank_region;
pub use spectral::{disc_sequence_injectivity, half_plane_injectivity, spectral_eps_disc, DiscSpec};

pub(crate) use rank::clip_region;
