//! Numerical inversion: local inverse certificates, path lifting, collision
//! probes and checks of the inverse's differential.

mod diffcheck;
mod lift;
mod local;
mod probe;

pub use diffcheck::{inverse_differential_check, inverse_differential_report, InverseDiffReport, INVERSE_SAMPLES};
pub use lift::{lift_path, lift_path_with, lift_polyline, InversionResult, LiftOptions, LiftState, LiftStatus};
pub use local::local_inverse_check;
pub use probe::injectivity_probe;
