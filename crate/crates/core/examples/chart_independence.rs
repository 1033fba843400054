//! Generalized Jacobians in different charts.
//!
//! With linear charts `x = φ(u)` on the source and `y = ψ(v)` on the target,
//! the shear reads `g = ψ⁻¹ ∘ f ∘ φ` and `∂f` is transported to
//! `Dψ⁻¹ ∂f Dφ`. The transported polytope matches the exact differential of
//! `g`, and maximal rank is unaffected.
//!
//! ```bash
//! cargo run --example chart_independence
//! ```

use lipinv::clarke::{certify_maximal_rank, clarke_exact, hausdorff_distance, transport_through_charts};
use lipinv::funcorpus::{bundled_corpus, AffinePiece, HalfSpace, Map, Polyhedron, PwaMap};
use lipinv::linalg::{self, Vector};
use lipinv::Result;
use nalgebra::{dmatrix, dvector};

fn main() -> Result<()> {
    let entry = bundled_corpus()?.into_iter().find(|e| e.name == "shear_abs").expect("bundled entry");
    let Map::Pwa(f) = &entry.map else { unreachable!("shear_abs is piecewise affine") };

    let phi = dmatrix![2.0, 1.0; 0.5, 1.0];
    let psi = dmatrix![1.0, -1.0; 1.0, 2.0];
    let psi_inv = linalg::inverse(&psi)?;

    // g is again piecewise affine: a cell a·x ≤ b becomes (φᵀa)·u ≤ b
    let pull = |cell: &Polyhedron| {
        let hs = cell
            .halfspaces()
            .iter()
            .map(|h| HalfSpace::new(phi.transpose() * &h.normal, h.offset))
            .collect();
        Polyhedron::new(2, hs)
    };
    let pieces = f
        .pieces()
        .iter()
        .map(|p| AffinePiece::new(&psi_inv * &p.matrix * &phi, &psi_inv * &p.offset, pull(&p.cell)?))
        .collect::<Result<Vec<_>>>()?;
    let g = PwaMap::new(pieces, pull(f.domain())?)?;

    let u: Vector = dvector![0.4, -0.2];
    let x = &phi * &u;
    println!("u = {:?} maps to x = φ(u) = {:?}", u.as_slice(), x.as_slice());
    println!("ψ⁻¹(f(φ u)) = {:?}, g(u) = {:?}", (&psi_inv * f.eval(&x)?).as_slice(), g.eval(&u)?.as_slice());

    // a point on the crease y = 0 of the shear, seen in both charts
    let u = linalg::inverse(&phi)? * dvector![1.5, 0.0];
    let df = clarke_exact(f, &(&phi * &u))?;
    let transported = transport_through_charts(&df, &phi, &psi_inv)?;
    let dg = clarke_exact(&g, &u)?;
    println!("generators: ∂f {}, ∂g {}", df.len(), dg.len());
    println!("Hausdorff distance between ∂g and the transported ∂f: {:.3e}", hausdorff_distance(&transported, &dg));
    println!("∂f: {}", certify_maximal_rank(&df, 41).summary());
    println!("∂g: {}", certify_maximal_rank(&dg, 41).summary());
    Ok(())
}
