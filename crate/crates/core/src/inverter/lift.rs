//! Path lifting: continuation of `f(x(s)) = γ(s)` along the chord from
//! `f(x₀)` to a target, with a damped semismooth Newton corrector.

use rand::Rng;
use serde::Serialize;

use crate::clarke::{clarke_at, polytope_conorm, ClarkeConfig};
use crate::error::{Error, Result};
use crate::finsler::Norm;
use crate::funcorpus::Map;
use crate::linalg::{self, Mat, Vector};
use crate::sampling::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftStatus {
    Converged,
    MaxSteps,
    /// The local co-norm collapsed or the corrector could not progress.
    StalledAtRank,
    LeftRegion,
}

/// One accepted continuation step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftState {
    pub s: f64,
    pub x: Vec<f64>,
    pub residual: f64,
    pub step_size: f64,
    pub newton_iterations: usize,
    /// Local co-norm estimate used for the step ceiling (minimum over both ends).
    pub conorm_estimate: f64,
    pub dx_norm: f64,
    pub dgamma_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionResult {
    pub status: LiftStatus,
    pub preimage: Vec<f64>,
    pub target: Vec<f64>,
    pub residual: f64,
    pub steps: usize,
    pub trace: Vec<LiftState>,
}

impl InversionResult {
    pub fn converged(&self) -> bool {
        self.status == LiftStatus::Converged
    }

    pub fn preimage_vector(&self) -> Vector {
        Vector::from_vec(self.preimage.clone())
    }

    /// Tab-separated trace: `s`, coordinates, residual, step, Newton count.
    pub fn trace_tsv(&self) -> String {
        let n = self.preimage.len();
        let mut out = String::from("s");
        for i in 0..n {
            out.push_str(&format!("\tx{i}"));
        }
        out.push_str("\tresidual\tstep\tnewton\n");
        for st in &self.trace {
            out.push_str(&format!("{:.16e}", st.s));
            for v in &st.x {
                out.push_str(&format!("\t{v:.16e}"));
            }
            out.push_str(&format!(
                "\t{:.16e}\t{:.16e}\t{}\n",
                st.residual, st.step_size, st.newton_iterations
            ));
        }
        out
    }
}

/// Tuning of the continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
    /// Fraction of the validated radius a predicted move may use.
    pub ceiling_factor: f64,
    /// Radius around the current point in which the co-norm estimate is
    /// trusted; `None` uses `max(1, |x|)`.
    pub safe_radius: Option<f64>,
    pub max_newton: usize,
    /// Hull grid for the local co-norm estimate.
    pub grid: usize,
    pub seed: u64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            tol: 1e-10,
            max_steps: 1000,
            initial_step: 0.05,
            ceiling_factor: 0.5,
            safe_radius: None,
            max_newton: 30,
            grid: 5,
            seed: 0,
        }
    }
}

const MIN_STEP: f64 = 1e-14;
const STALL_CONORM: f64 = 1e-12;

/// A generator of `∂f(x)` suited to moving in direction `d`: the piece
/// entered along `d` for piecewise-affine maps, the Jacobian (or that of a
/// random point within 1e-8) for black-box maps.
fn generator(map: &Map, x: &Vector, d: Option<&Vector>, rng: &mut SeededRng) -> Result<Mat> {
    match map {
        Map::Pwa(p) => {
            let i = match d.filter(|d| d.norm() > 0.0) {
                Some(d) => p.piece_in_direction(x, d)?,
                None => p.active_pieces(x, crate::funcorpus::FACET_TOL)?[0],
            };
            Ok(p.pieces()[i].matrix.clone())
        }
        Map::Lipschitz(l) => {
            if let Some(j) = l.jacobian_at(x) {
                return Ok(j);
            }
            for _ in 0..8 {
                let y = x + sampling::unit_direction(rng, x.len()) * (1e-8 * rng.random::<f64>());
                if l.in_domain(&y) {
                    if let Some(j) = l.jacobian_at(&y) {
                        return Ok(j);
                    }
                }
            }
            Ok(l.fd_jacobian(x))
        }
    }
}

/// Semismooth Newton step for `f(x) = g`: `−B⁻¹ r`, with `B` re-chosen
/// along the tentative direction for piecewise-affine maps.
fn newton_direction(map: &Map, x: &Vector, r: &Vector, rng: &mut SeededRng) -> Result<Vector> {
    let b0 = generator(map, x, None, rng)?;
    let d0 = -(linalg::inverse(&b0)? * r);
    if matches!(map, Map::Pwa(_)) {
        let b = generator(map, x, Some(&d0), rng)?;
        Ok(-(linalg::inverse(&b)? * r))
    } else {
        Ok(d0)
    }
}

struct Corrected {
    x: Vector,
    residual: f64,
    iterations: usize,
}

/// Damped Newton with Armijo backtracking on `½‖f(x) − g‖²`.
fn correct(map: &Map, x0: &Vector, g: &Vector, tol: f64, max_iter: usize, rng: &mut SeededRng) -> Result<Option<Corrected>> {
    let mut x = x0.clone();
    let mut r = map.eval(&x)? - g;
    let mut res = r.norm();
    for it in 0..=max_iter {
        if res <= tol {
            return Ok(Some(Corrected {
                x,
                residual: res,
                iterations: it,
            }));
        }
        if it == max_iter {
            break;
        }
        let dx = match newton_direction(map, &x, &r, rng) {
            Ok(d) => d,
            Err(Error::SingularElement) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let y = &x + &dx * lambda;
            if map.in_domain(&y) {
                let ry = map.eval(&y)? - g;
                let ny = ry.norm();
                if ny.is_finite() && ny * ny <= (1.0 - 2e-4 * lambda) * res * res {
                    x = y;
                    r = ry;
                    res = ny;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(None);
        }
    }
    Ok(None)
}

fn local_conorm(map: &Map, x: &Vector, grid: usize, seed: u64) -> Result<f64> {
    let cfg = ClarkeConfig {
        samples: 8,
        seed,
        ..ClarkeConfig::default()
    };
    let p = clarke_at(map, x, &cfg)?;
    Ok(polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, grid).0)
}

/// Lift the segment from `f(x₀)` to `y` with default options.
pub fn lift_path(map: &Map, x0: &Vector, y: &Vector, tol: f64, max_steps: usize) -> Result<InversionResult> {
    lift_path_with(
        map,
        x0,
        y,
        &LiftOptions {
            tol,
            max_steps,
            ..LiftOptions::default()
        },
    )
}

/// Predictor-corrector continuation along `γ(s) = (1 − s) f(x₀) + s y`.
///
/// Each predictor move `Δx = B⁻¹ Δγ` is capped so that `‖Δγ‖ / m̂` stays
/// within a fraction of the validated radius, where `m̂` is the local
/// co-norm estimate. Steps double after quick corrector convergence and
/// halve after failures; `s` only increases.
pub fn lift_path_with(map: &Map, x0: &Vector, y: &Vector, opts: &LiftOptions) -> Result<InversionResult> {
    map.require_square("path lifting")?;
    if y.len() != map.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "lift target",
            expected: map.dim_out(),
            found: y.len(),
        });
    }
    let y0 = map.eval(x0)?;
    let chord = y - &y0;
    let chord_norm = chord.norm();
    let mut rng = sampling::seeded(opts.seed);
    let mut x = x0.clone();
    let mut s = 0.0;
    let mut ds = opts.initial_step.min(1.0);
    let mut trace = Vec::new();
    let mut steps = 0usize;
    let mut m_here = local_conorm(map, &x, opts.grid, opts.seed)?;
    let finish = |status, x: &Vector, trace, steps| -> Result<InversionResult> {
        Ok(InversionResult {
            status,
            preimage: x.iter().copied().collect(),
            target: y.iter().copied().collect(),
            residual: (map.eval(x)? - y).norm(),
            steps,
            trace,
        })
    };

    while s < 1.0 && chord_norm > 0.0 {
        if steps >= opts.max_steps {
            return finish(LiftStatus::MaxSteps, &x, trace, steps);
        }
        steps += 1;
        if !(m_here > STALL_CONORM) {
            return finish(LiftStatus::StalledAtRank, &x, trace, steps);
        }
        let safe = opts.safe_radius.unwrap_or_else(|| x.norm().max(1.0));
        let ceiling = opts.ceiling_factor * m_here * safe / chord_norm;
        ds = ds.min(ceiling).min(1.0 - s);
        if ds < MIN_STEP {
            return finish(LiftStatus::StalledAtRank, &x, trace, steps);
        }
        let s_next = if 1.0 - s - ds < MIN_STEP { 1.0 } else { s + ds };
        let dgamma = &chord * (s_next - s);
        let g = &y0 + &chord * s_next;
        // Predictor along the generator entered in the tentative direction.
        let pred = match newton_direction(map, &x, &(-&dgamma), &mut rng) {
            Ok(d) => &x + d,
            Err(Error::SingularElement) => return finish(LiftStatus::StalledAtRank, &x, trace, steps),
            Err(e) => return Err(e),
        };
        if !map.in_domain(&pred) {
            ds *= 0.5;
            if ds < MIN_STEP {
                return finish(LiftStatus::LeftRegion, &x, trace, steps);
            }
            continue;
        }
        let path_tol = opts.tol * y.norm().max(1.0);
        let Some(c) = correct(map, &pred, &g, path_tol, opts.max_newton, &mut rng)? else {
            ds *= 0.5;
            continue;
        };
        let m_next = local_conorm(map, &c.x, opts.grid, sampling::derive_seed(opts.seed, steps as u64))?;
        trace.push(LiftState {
            s: s_next,
            x: c.x.iter().copied().collect(),
            residual: c.residual,
            step_size: s_next - s,
            newton_iterations: c.iterations,
            conorm_estimate: m_here.min(m_next),
            dx_norm: (&c.x - &x).norm(),
            dgamma_norm: dgamma.norm(),
        });
        x = c.x;
        s = s_next;
        m_here = m_next;
        if c.iterations <= 3 {
            ds *= 2.0;
        }
    }

    // Final polish at s = 1 to the requested tolerance.
    let res = (map.eval(&x)? - y).norm();
    if res > opts.tol {
        if let Some(c) = correct(map, &x, y, opts.tol, opts.max_newton.max(50), &mut rng)? {
            x = c.x;
        }
    }
    let res = (map.eval(&x)? - y).norm();
    let status = if res <= opts.tol {
        LiftStatus::Converged
    } else {
        LiftStatus::MaxSteps
    };
    finish(status, &x, trace, steps)
}

/// Lift a polyline `f(x₀) → ys[0] → ys[1] → …` segment by segment.
pub fn lift_polyline(map: &Map, x0: &Vector, ys: &[Vector], opts: &LiftOptions) -> Result<InversionResult> {
    let mut x = x0.clone();
    let mut trace = Vec::new();
    let mut steps = 0;
    let mut last = None;
    for y in ys {
        let r = lift_path_with(map, &x, y, opts)?;
        steps += r.steps;
        trace.extend(r.trace.iter().cloned());
        x = r.preimage_vector();
        let ok = r.converged();
        last = Some(r);
        if !ok {
            break;
        }
    }
    let mut r = last.ok_or_else(|| Error::invalid("polyline needs at least one target"))?;
    r.trace = trace;
    r.steps = steps;
    Ok(r)
}
