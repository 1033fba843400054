//! Eigenvalue conditions for injectivity of `f(x, y) = (−x + 0.3|y|, −y + 0.3|x|)`.
//!
//! Every matrix in the generalized Jacobian has eigenvalues with real part
//! at most `−0.7`, so no spectrum meets the closed right half-plane
//! and no disc around a positive real point. A random-pair probe finds no
//! collisions either.
//!
//! ```bash
//! cargo run --release --example spectral_injectivity
//! ```

use lipinv::cli::entry_region;
use lipinv::criteria::{disc_sequence_injectivity, half_plane_injectivity, DiscSpec};
use lipinv::funcorpus::bundled_corpus;
use lipinv::inverter::injectivity_probe;
use lipinv::Result;

fn main() -> Result<()> {
    let entry = bundled_corpus()?.into_iter().find(|e| e.name == "neg_cross").expect("bundled entry");
    let region = entry_region(&entry)?;

    let half = half_plane_injectivity(&entry.map, &region, 64, 41, 1)?;
    println!("{}", half.summary());
    println!("  max Re λ = {:.6}", half.evidence["max_real_part"]);

    let discs = DiscSpec::harmonic(8, 0.2, 0.2)?;
    let seq = disc_sequence_injectivity(&entry.map, &discs, &region, 64, 41, 1)?;
    println!("{}", seq.summary());

    let shifts: Vec<f64> = (1..=8).map(|k| 1.0 / f64::from(k)).collect();
    let probe = injectivity_probe(&entry.map, &region, &shifts, 20_000, 1)?;
    println!("{}", probe.summary());
    for (k, v) in &probe.evidence {
        println!("  {k} = {v}");
    }
    Ok(())
}
