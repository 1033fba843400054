//! Local invertibility from maximal rank of the generalized differential.

use crate::clarke::{certify_maximal_rank, clarke_at, conorm_floor, polytope_conorm, ClarkeConfig};
use crate::criteria::{Certificate, Criterion, Verdict};
use crate::error::Result;
use crate::finsler::Norm;
use crate::funcorpus::Map;
use crate::linalg::Vector;

/// Whether `f` is a local Lipschitz homeomorphism at `x`: maximal rank of
/// `∂f(x)`, with the bound `1 / //∂f(x)//` on the inverse's differential.
pub fn local_inverse_check(map: &Map, x: &Vector, grid: usize) -> Result<Certificate> {
    map.require_square("local inverse")?;
    let p = clarke_at(map, x, &ClarkeConfig::default())?;
    let rank = certify_maximal_rank(&p, grid);
    let (conorm, _) = polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, grid);
    let floor = conorm_floor(&p, &Norm::Euclidean, &Norm::Euclidean, grid);
    let mut cert = Certificate::new(Criterion::LocalInverse, rank.verdict)
        .certified(rank.certified)
        .param("point", x.iter().copied().collect::<Vec<_>>())
        .param("grid", grid)
        .evidence("conorm_estimate", conorm)
        .evidence("conorm_floor", floor)
        .evidence("inverse_norm_bound", 1.0 / conorm)
        .evidence("certified_inverse_norm_bound", if floor > 0.0 { 1.0 / floor } else { f64::INFINITY });
    cert.witnesses = rank.witnesses.clone();
    if rank.verdict == Verdict::Positive {
        cert = cert.note("f is a local Lipschitz homeomorphism near the point");
    }
    cert.sub_certificates.push(rank);
    Ok(cert)
}
