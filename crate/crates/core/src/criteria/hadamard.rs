//! Integral-divergence verdicts on radial profiles.

use crate::criteria::profile::{ProfileKind, RadialProfile};
use crate::criteria::{Certificate, Criterion, Verdict, Witness};
use crate::error::{Error, Result};

/// Values at or below this are treated as a vanishing profile.
const VANISHING: f64 = 1e-12;

/// Constants linking `s(t)` to `m(t)` for maps whose differentials are
/// bounded by `k`: `m(t) ≥ k3 · s(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    pub k: f64,
    /// Bound on matrix entries.
    pub k1: f64,
    /// Bound on `(n−1)`-minors: `(n−1)! k1^{n−1}`.
    pub k2: f64,
    /// `1 / (n k2)`.
    pub k3: f64,
}

pub fn spectral_constants(k: f64, n: usize) -> SpectralConstants {
    let k1 = k;
    let fact: f64 = (1..n).map(|i| i as f64).product();
    let k2 = fact * k1.powi(n as i32 - 1);
    SpectralConstants {
        k,
        k1,
        k2,
        k3: 1.0 / (n as f64 * k2),
    }
}

/// Trapezoid integral of the profile over `[0, T]`, starting from the
/// center value at `t = 0`.
pub fn profile_integral(profile: &RadialProfile) -> f64 {
    let mut total = 0.0;
    let (mut t0, mut v0) = (0.0, profile.center_value);
    for (&t, &v) in profile.radii.iter().zip(&profile.values) {
        total += 0.5 * (v + v0) * (t - t0);
        t0 = t;
        v0 = v;
    }
    total
}

/// Least-squares line through `(x, y)`: returns (intercept, slope, rms residual).
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (intercept, slope, rms)
}

/// Tail model fitted to the last third of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// `ln v ≈ intercept + slope · t` (or `· ln t` for the power law).
    pub intercept: f64,
    pub slope: f64,
    pub power_law: bool,
    /// `∫_T^∞` of the fitted model (infinite when divergent).
    pub tail_integral: f64,
    /// `∫_0^∞` of the fitted model (infinite when divergent).
    pub model_integral: f64,
}

/// Fit exponential and power-law tails on the last third of the profile and
/// keep the one with the smaller log-residual.
pub fn fit_tail(profile: &RadialProfile) -> Option<TailFit> {
    let n = profile.radii.len();
    let start = (2 * n) / 3;
    let start = start.min(n.saturating_sub(2));
    let t: Vec<f64> = profile.radii[start..].to_vec();
    let v: Vec<f64> = profile.values[start..].to_vec();
    if t.len() < 2 || v.iter().any(|x| *x <= 0.0) {
        return None;
    }
    let lv: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let tmax = *t.last().expect("nonempty");
    let (a, b, r_exp) = fit_line(&t, &lv);
    let (c, p, r_pow) = fit_line(&lt, &lv);
    let exp_tail = if b < 0.0 {
        (a + b * tmax).exp() / -b
    } else {
        f64::INFINITY
    };
    let pow_tail = if p < -1.0 {
        c.exp() * tmax.powf(p + 1.0) / (-(p + 1.0))
    } else {
        f64::INFINITY
    };
    Some(if r_pow < r_exp && (p - b).abs() > 0.0 && r_pow < 0.5 * r_exp {
        TailFit {
            intercept: c,
            slope: p,
            power_law: true,
            tail_integral: pow_tail,
            model_integral: f64::INFINITY,
        }
    } else {
        TailFit {
            intercept: a,
            slope: b,
            power_law: false,
            tail_integral: exp_tail,
            model_integral: if b < 0.0 { a.exp() / -b } else { f64::INFINITY },
        }
    })
}

fn is_flat(profile: &RadialProfile) -> bool {
    let max = profile.values.iter().copied().fold(profile.center_value, f64::max);
    let min = profile.min_value();
    min > 0.0 && max / min - 1.0 <= 1e-9
}

fn verdict_on_profile(criterion: Criterion, profile: &RadialProfile, floor: Option<f64>) -> Result<Certificate> {
    if profile.radii.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let horizon = profile.horizon();
    let integral = profile_integral(profile);
    let min = profile.min_value();
    let base = |v: Verdict| {
        Certificate::new(criterion, v)
            .with_horizon(horizon)
            .param("radii", profile.radii.len())
            .evidence("integral", integral)
            .evidence("min_value", min)
    };

    if let Some(i) = profile.values.iter().position(|v| *v <= VANISHING) {
        return Ok(base(Verdict::Negative)
            .certified(profile.exact)
            .note("profile vanishes inside the horizon")
            .witness(
                Witness::new("vanishing radius")
                    .value(profile.radii[i])
                    .at(&crate::linalg::Vector::from_vec(profile.witnesses[i].clone())),
            ));
    }

    let (floor, certified) = match (floor, &profile.floors) {
        (Some(f), _) => (Some(f), true),
        (None, Some(fl)) if fl.last().is_some_and(|f| *f > 0.0) => (fl.last().copied(), profile.exact),
        (None, _) if is_flat(profile) => (Some(min), false),
        _ => (None, false),
    };
    if let Some(f) = floor.filter(|f| *f > 0.0 && min >= *f - 1e-12) {
        return Ok(base(Verdict::Positive)
            .certified(certified)
            .evidence("floor", f)
            .note(format!(
                "profile stays above {f:e} up to t = {horizon}; the integral diverges if the floor persists beyond"
            )));
    }

    let Some(fit) = fit_tail(profile) else {
        return Ok(base(Verdict::Inconclusive).note("too few radii for a tail fit"));
    };
    let cert = base(Verdict::Negative)
        .evidence("tail_slope", fit.slope)
        .evidence("tail_intercept", fit.intercept)
        .evidence("tail_integral", fit.tail_integral)
        .evidence("fitted_total_integral", integral + fit.tail_integral)
        .evidence("fitted_model_integral", fit.model_integral)
        .param("tail_model", if fit.power_law { "power" } else { "exponential" });
    if fit.tail_integral.is_finite() {
        Ok(cert.note("fitted tail is integrable: the profile integral appears to converge"))
    } else {
        Ok(Certificate { verdict: Verdict::Heuristic, ..cert }
            .note("profile decays but the fitted tail has a divergent integral"))
    }
}

/// Verdict for the co-norm profile `m(t)`: positive-to-horizon when the
/// profile stays above a positive floor (given, certified from the
/// function class, or a flat sampled profile), negative-signal when it
/// vanishes or its fitted tail is integrable, heuristic otherwise.
pub fn hadamard_verdict(profile: &RadialProfile, floor: Option<f64>) -> Result<Certificate> {
    if profile.kind != ProfileKind::CoNorm {
        return Err(Error::invalid("hadamard verdict needs a co-norm profile"));
    }
    verdict_on_profile(Criterion::Hadamard, profile, floor)
}

/// Verdict for the spectral profile `s(t)`. With a differential bound `k`
/// the constants of `m(t) ≥ K₃ s(t)` are attached as evidence.
pub fn spectral_verdict(profile: &RadialProfile, floor: Option<f64>, k: Option<f64>) -> Result<Certificate> {
    if profile.kind != ProfileKind::SpectralPowerN {
        return Err(Error::invalid("spectral verdict needs a spectral profile"));
    }
    let mut cert = verdict_on_profile(Criterion::Spectral, profile, floor)?;
    if let Some(k) = k {
        let c = spectral_constants(k, profile.center.len());
        cert = cert
            .evidence("k", c.k)
            .evidence("k1", c.k1)
            .evidence("k2", c.k2)
            .evidence("k3", c.k3);
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(values: impl Fn(f64) -> f64, radii: Vec<f64>) -> RadialProfile {
        let vals: Vec<f64> = radii.iter().map(|t| values(*t)).collect();
        RadialProfile {
            kind: ProfileKind::CoNorm,
            center: vec![0.0],
            center_value: values(0.0),
            witnesses: vec![vec![0.0]; radii.len()],
            samples: vec![1; radii.len()],
            raw_values: vals.clone(),
            values: vals,
            radii,
            floors: None,
            exact: false,
        }
    }

    fn radii() -> Vec<f64> {
        (1..=100).map(|k| k as f64 * 0.1).collect()
    }

    #[test]
    fn constant_is_positive() {
        let c = hadamard_verdict(&profile(|_| 1.0, radii()), None).unwrap();
        assert_eq!(c.verdict, Verdict::Positive);
        assert!((c.evidence["integral"] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_decay_is_negative() {
        let c = hadamard_verdict(&profile(|t| (-t).exp(), radii()), None).unwrap();
        assert_eq!(c.verdict, Verdict::Negative);
        assert!((c.evidence["fitted_total_integral"] - 1.0).abs() < 0.01);
        assert!((c.evidence["fitted_model_integral"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slow_power_decay_is_heuristic() {
        let c = hadamard_verdict(&profile(|t| 1.0 / (1.0 + t), radii()), None).unwrap();
        assert_eq!(c.verdict, Verdict::Heuristic);
    }

    #[test]
    fn empty_profile_errors() {
        assert!(matches!(hadamard_verdict(&profile(|_| 1.0, vec![]), None), Err(Error::EmptyProfile)));
    }

    #[test]
    fn constants() {
        let c = spectral_constants(2.0, 3);
        assert_eq!(c.k2, 2.0 * 4.0);
        assert_eq!(c.k3, 1.0 / 24.0);
    }
}
