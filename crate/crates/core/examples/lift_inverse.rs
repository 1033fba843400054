//! Inverting maps by lifting the straight path `γ(s) = (1 − s) f(x₀) + s y`.
//!
//! The shear and `2x + sin x` are global homeomorphisms and the lift
//! converges; `eˣ` cannot reach `−1` and the lift runs off toward `−∞`
//! while the co-norm estimate collapses.
//!
//! ```bash
//! cargo run --example lift_inverse
//! ```

use lipinv::funcorpus::bundled_corpus;
use lipinv::inverter::lift_path;
use lipinv::Result;
use nalgebra::dvector;

fn main() -> Result<()> {
    let corpus = bundled_corpus()?;
    let get = |name: &str| corpus.iter().find(|e| e.name == name).expect("bundled entry");

    let cases = [
        ("shear_abs", dvector![0.0, 0.0], dvector![3.0, -2.0]),
        ("twoxsin", dvector![0.0], dvector![10.0]),
        ("exp1d", dvector![0.0], dvector![-1.0]),
    ];
    for (name, x0, y) in cases {
        let r = lift_path(&get(name).map, &x0, &y, 1e-10, 1000)?;
        println!("{name}: target {:?}", y.as_slice());
        println!("  status {:?} after {} steps, residual {:.3e}", r.status, r.steps, r.residual);
        println!("  x* = {:?}", r.preimage);
        if let Some(last) = r.trace.last() {
            println!("  last accepted s = {:.6}, co-norm estimate {:.3e}", last.s, last.conorm_estimate);
        }
    }

    // the trace is plot-ready: s, x, residual, step size, Newton iterations
    let r = lift_path(&get("twoxsin").map, &dvector![0.0], &dvector![10.0], 1e-10, 1000)?;
    print!("{}", r.trace_tsv());
    Ok(())
}
