//! Distances in a Finsler patch by shortest paths on a grid graph.
//!
//! With the conformal norm `‖v‖ₓ = e^{x₁}|v|` the straight segment from
//! `(0, 0)` to `(1, 0)` has length `e − 1`; the graph search recovers it and
//! bounds its own discretization error.
//!
//! ```bash
//! cargo run --example finsler_distance
//! ```

use std::f64::consts::E;

use lipinv::finsler::{distance_with_error, finsler_distance, FinslerPatch, Norm, NormField, ScalarField};
use lipinv::funcorpus::Polyhedron;
use lipinv::linalg::Vector;
use lipinv::Result;
use nalgebra::dvector;

fn main() -> Result<()> {
    let domain = Polyhedron::from_box(&dvector![-0.5, -0.5], &dvector![1.5, 1.5])?;

    let flat = FinslerPatch::new(domain.clone(), NormField::Constant(Norm::Euclidean));
    let (d, path) = finsler_distance(&flat, &dvector![0.0, 0.0], &dvector![1.0, 1.0], 0.05)?;
    println!("Euclidean box: d = {d:.6} (√2 = {:.6}), path with {} vertices", 2f64.sqrt(), path.vertices().len());

    let conformal = FinslerPatch::new(
        domain,
        NormField::Conformal {
            factor: ScalarField::new(|x: &Vector| x[0].exp()),
            base: Norm::Euclidean,
        },
    );
    for mesh in [0.2, 0.1, 0.05] {
        let (d, err, _) = distance_with_error(&conformal, &dvector![0.0, 0.0], &dvector![1.0, 0.0], mesh)?;
        println!("conformal, mesh {mesh}: d = {d:.6} ± {err:.1e} (e − 1 = {:.6})", E - 1.0);
    }
    Ok(())
}
