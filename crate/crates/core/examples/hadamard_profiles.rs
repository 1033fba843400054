//! Radial co-norm profiles `m(t)` and the Hadamard integral condition.
//!
//! `2x + sin x` has `m(t) = 1` once the ball around `π` reaches a point
//! where `cos x = −1`, so `∫ m` grows without bound: positive. `eˣ` around
//! `0` decays like `e^{−t}` and the integral converges: negative, and indeed
//! `eˣ` misses every negative target.
//!
//! ```bash
//! cargo run --example hadamard_profiles
//! ```

use std::f64::consts::PI;

use lipinv::criteria::{hadamard_verdict, radial_profile, ProfileKind};
use lipinv::funcorpus::bundled_corpus;
use lipinv::Result;
use nalgebra::dvector;

fn main() -> Result<()> {
    let corpus = bundled_corpus()?;
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    for (name, center) in [("twoxsin", PI), ("exp1d", 0.0)] {
        let entry = corpus.iter().find(|e| e.name == name).expect("bundled entry");
        let profile = radial_profile(&entry.map, &dvector![center], &radii, ProfileKind::CoNorm, 64, 41, 0)?;
        println!("{name} around {center:.4}:");
        for (t, m) in profile.radii.iter().zip(&profile.values) {
            println!("  m({t:>4}) = {m:.6e}");
        }
        let cert = hadamard_verdict(&profile, None)?;
        println!("  {}", cert.summary());
        for (k, v) in &cert.evidence {
            println!("    {k} = {v:.6e}");
        }
    }
    Ok(())
}
