//! The generalized Jacobian of the shear `f(x, y) = (x + |y|, y)`.
//!
//! Off the axis `y = 0` the map is affine and `∂f` is a single matrix; on
//! the axis it is the segment between `[[1, 1], [0, 1]]` and
//! `[[1, −1], [0, 1]]`. Every element is invertible, the smallest co-norm
//! is `1/φ` and the inverses form the differential of the inverse map.
//!
//! ```bash
//! cargo run --example clarke_shear
//! ```

use lipinv::clarke::{certify_maximal_rank, clarke_exact, hull_of_inverses, polytope_conorm, polytope_norm};
use lipinv::finsler::Norm;
use lipinv::funcorpus::{bundled_corpus, Map};
use lipinv::Result;
use nalgebra::dvector;

fn main() -> Result<()> {
    let entry = bundled_corpus()?.into_iter().find(|e| e.name == "shear_abs").expect("bundled shear");
    let Map::Pwa(f) = &entry.map else { unreachable!("shear_abs is piecewise affine") };

    for x in [dvector![1.0, 2.0], dvector![1.0, -2.0], dvector![0.0, 0.0]] {
        let p = clarke_exact(f, &x)?;
        println!("∂f({}, {}) has {} generator(s):", x[0], x[1], p.len());
        for g in p.generators() {
            println!("  [[{:+}, {:+}], [{:+}, {:+}]]", g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
        }
    }

    let p = clarke_exact(f, &dvector![0.0, 0.0])?;
    let norm = polytope_norm(&p, &Norm::Euclidean, &Norm::Euclidean)?;
    let (conorm, at) = polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, 41);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    println!("‖∂f(0)‖ = {norm:.12} (φ = {phi:.12})");
    println!("m(∂f(0)) = {conorm:.12} at weights {:?} (1/φ = {:.12})", at.coefficients, 1.0 / phi);

    let rank = certify_maximal_rank(&p, 41);
    println!("maximal rank: {}", rank.summary());

    // inverses of grid elements; for the shear they sweep [[1, ∓s], [0, 1]]
    let inv = hull_of_inverses(&p, 41)?;
    let corner = |k: usize| inv.generators().iter().map(|g| g[(0, 1)]).fold(f64::NAN, |a, b| if k == 0 { a.min(b) } else { a.max(b) });
    println!(
        "inverse hull: {} generators, upper-right entries in [{:+.6}, {:+.6}]",
        inv.len(),
        corner(0),
        corner(1)
    );
    Ok(())
}
