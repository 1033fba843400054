//! Every bundled corpus entry with its expected verdicts, recomputed.
//!
//! Set `LIPINV_CORPUS_DIR` to run the same tour over your own spec files.
//!
//! ```bash
//! cargo run --release --example corpus_tour
//! ```

use lipinv::cli::{run_criterion, RunParams};
use lipinv::funcorpus::bundled_corpus;
use lipinv::Result;

fn main() -> Result<()> {
    let params = RunParams::default();
    for entry in bundled_corpus()? {
        println!("{} — {}", entry.name, entry.description);
        println!("  dimension {}, center {:?}, radius {}", entry.map.dim_in(), entry.settings.center.as_slice(), entry.settings.radius);
        for (criterion, expected) in &entry.expected_verdicts {
            let cert = run_criterion(&entry, *criterion, &params)?;
            let mark = if cert.verdict == *expected { "ok" } else { "MISMATCH" };
            println!("  {mark:8} expected {:<12} {}", expected.key(), cert.summary());
        }
    }
    Ok(())
}
