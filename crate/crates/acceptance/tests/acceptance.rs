//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

use std::f64::consts::{E, PI};
use std::time::Instant;

use lipinv::clarke::{
    clarke_at, clarke_exact, hausdorff_distance, hull_of_inverses, polytope_conorm, polytope_norm,
    transport_through_charts, ClarkeConfig,
};
use lipinv::cli::{entry_region, main_with_args};
use lipinv::criteria::{hadamard_verdict, half_plane_injectivity, radial_profile, ProfileKind, Verdict};
use lipinv::finsler::{
    finsler_distance, sampled_lipschitz, scalar_derivatives, sup_norm_estimate, FinslerPatch, Norm, NormField,
    ScalarField,
};
use lipinv::funcorpus::{bundled_corpus, CorpusEntry, Map, Polyhedron};
use lipinv::inverter::{injectivity_probe, inverse_differential_report, lift_path, LiftStatus};
use lipinv::linalg::{self, Mat, Vector};
use lipinv::region::Region;
use lipinv::sampling;
use lipinv_acceptance::{bisect, shear_conorm_scan, symmetric_2x2_eigenvalues};
use nalgebra::{dmatrix, dvector};

type Outcome = Result<String, String>;

fn entry(name: &str) -> CorpusEntry {
    bundled_corpus()
        .expect("bundled corpus loads")
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("corpus entry {name}"))
}

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let e = entry("shear_abs");
    let pwa = e.map.as_pwa().ok_or("shear_abs is piecewise affine")?;
    let p = clarke_exact(pwa, &dvector![0.0, 0.0]).map_err(err)?;
    let plus = dmatrix![1.0, 1.0; 0.0, 1.0];
    let minus = dmatrix![1.0, -1.0; 0.0, 1.0];
    let gens = p.generators();
    check(
        gens.len() == 2 && gens.contains(&plus) && gens.contains(&minus),
        format!("generators {gens:?}"),
    )?;
    let (conorm, _) = polytope_conorm(&p, &Norm::Euclidean, &Norm::Euclidean, 101);
    let elapsed = start.elapsed().as_secs_f64();
    let oracle = shear_conorm_scan(100_000);
    let diff = (conorm - oracle).abs();
    check(diff <= 1e-9, format!("co-norm {conorm} vs oracle {oracle}"))?;
    check(elapsed < 1.0, format!("runtime {elapsed:.3} s"))?;
    Ok(format!("generators exact; co-norm {conorm:.12} vs scan {oracle:.12} (|Δ| = {diff:.1e}); {elapsed:.3} s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for e in bundled_corpus().map_err(err)? {
        let region = entry_region(&e).map_err(err)?;
        let mut rng = sampling::seeded(2);
        let n = e.map.dim_in();
        let patch = FinslerPatch::euclidean(n);
        for i in 0..50 {
            let x = region.sample(&mut rng);
            let est = scalar_derivatives(&e.map, &patch, &patch, &x, &[1e-3, 1e-4, 1e-5], 64, i).map_err(err)?;
            let p = clarke_at(&e.map, &x, &ClarkeConfig::default()).map_err(err)?;
            let norm = polytope_norm(&p, &Norm::Euclidean, &Norm::Euclidean).map_err(err)?;
            let ratio = est.upper / norm;
            worst = worst.max(ratio);
            check(ratio <= 1.05, format!("{} at {:?}: D+ {} > 1.05 × {}", e.name, x.as_slice(), est.upper, norm))?;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 60.0, format!("runtime {elapsed:.1} s"))?;
    Ok(format!("4 maps × 50 points, max D+/|||∂f||| = {worst:.6}; {elapsed:.1} s"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for e in bundled_corpus().map_err(err)? {
        let region = entry_region(&e).map_err(err)?;
        let lip = sampled_lipschitz(&e.map, &region, 10_000, 3).map_err(err)?;
        let sup = sup_norm_estimate(&e.map, &region, 256, 3).map_err(err)?;
        let ratio = lip / sup.value;
        check(
            (0.95..=1.0 + 1e-9).contains(&ratio),
            format!("{}: Lip {lip} / sup {} = {ratio}", e.name, sup.value),
        )?;
        lines.push(format!("{} {ratio:.6}", e.name));
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 30.0, format!("runtime {elapsed:.1} s"))?;
    Ok(format!("Lip/sup ratios: {}; {elapsed:.1} s", lines.join(", ")))
}

fn criterion_4() -> Outcome {
    let e = entry("twoxsin");
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    let profile = radial_profile(&e.map, &dvector![PI], &radii, ProfileKind::CoNorm, 64, 41, 4).map_err(err)?;
    for (t, v) in radii.iter().zip(&profile.values) {
        check((0.999..=1.001).contains(v), format!("m({t}) = {v}"))?;
    }
    let cert = hadamard_verdict(&profile, None).map_err(err)?;
    let integral = cert.evidence["integral"];
    check(cert.verdict == Verdict::Positive, format!("verdict {}", cert.verdict_label()))?;
    check(integral >= 9.9, format!("integral {integral}"))?;
    let f = |x: f64| 2.0 * x + x.sin();
    let mut worst_res: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    for k in 0..100 {
        let y = -20.0 + 40.0 * k as f64 / 99.0;
        let r = lift_path(&e.map, &dvector![0.0], &dvector![y], 1e-10, 1000).map_err(err)?;
        check(r.converged(), format!("target {y}: {:?}", r.status))?;
        let x = r.preimage[0];
        let oracle = bisect(|x| f(x) - y, -21.0, 21.0);
        worst_res = worst_res.max((f(x) - y).abs());
        worst_err = worst_err.max((x - oracle).abs());
    }
    check(worst_res <= 1e-8, format!("residual {worst_res}"))?;
    check(worst_err <= 1e-6, format!("oracle mismatch {worst_err}"))?;
    Ok(format!(
        "m(t) ∈ [{:.6}, {:.6}], {}, integral {integral:.4}; 100 lifts: max residual {worst_res:.1e}, max |x − bisection| {worst_err:.1e}",
        profile.values.iter().copied().fold(f64::INFINITY, f64::min),
        profile.values.iter().copied().fold(0.0, f64::max),
        cert.verdict_label()
    ))
}

fn criterion_5() -> Outcome {
    let e = entry("exp1d");
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    let profile = radial_profile(&e.map, &dvector![0.0], &radii, ProfileKind::CoNorm, 64, 41, 5).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (t, v) in radii.iter().zip(&profile.values) {
        worst = worst.max((v - (-t).exp()).abs());
    }
    check(worst <= 1e-4, format!("max |m(t) − e^-t| = {worst}"))?;
    let cert = hadamard_verdict(&profile, None).map_err(err)?;
    check(cert.verdict == Verdict::Negative, format!("verdict {}", cert.verdict_label()))?;
    let model = cert.evidence.get("fitted_model_integral").copied().unwrap_or(f64::INFINITY);
    check(model <= 1.01, format!("fitted integral {model}"))?;
    let r = lift_path(&e.map, &dvector![0.0], &dvector![-1.0], 1e-10, 1000).map_err(err)?;
    check(r.status != LiftStatus::Converged, "lift to -1 converged".into())?;
    Ok(format!(
        "max |m(t) − e^-t| = {worst:.1e}, {}, fitted ∫ = {model:.6}; lift to −1 ends {:?} (residual {:.3})",
        cert.verdict_label(),
        r.status,
        r.residual
    ))
}

fn criterion_6() -> Outcome {
    let e = entry("neg_cross");
    let pwa = e.map.as_pwa().ok_or("neg_cross is piecewise affine")?;
    let (lo, hi) = (dvector![-5.0, -5.0], dvector![5.0, 5.0]);
    let (want_lo, want_hi) = symmetric_2x2_eigenvalues(-1.0, 0.3);
    let mut rng = sampling::seeded(6);
    let points = 1000;
    let mut off = 0usize;
    let mut example = None;
    for _ in 0..points {
        let x = sampling::uniform_in_box(&mut rng, &lo, &hi);
        let p = clarke_exact(pwa, &x).map_err(err)?;
        for g in p.generators() {
            let mut eig = linalg::eigenvalues(g);
            eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            let ok = eig[0].im.abs() <= 1e-9
                && eig[1].im.abs() <= 1e-9
                && (eig[0].re - want_lo).abs() <= 1e-9
                && (eig[1].re - want_hi).abs() <= 1e-9;
            if !ok {
                off += 1;
                example.get_or_insert((x.clone(), eig.clone()));
            }
        }
    }
    let region = Region::cube(lo.clone(), hi.clone()).map_err(err)?;
    let half = half_plane_injectivity(&e.map, &region, 64, 41, 6).map_err(err)?;
    let probe = injectivity_probe(&e.map, &region, &e.settings.shifts, 100_000, 6).map_err(err)?;
    let collisions = probe.evidence["collisions"];
    let summary = format!(
        "half plane {} (max Re λ = {:.6}), probe {} with {collisions} collisions over 10^5 pairs",
        half.verdict_label(),
        half.evidence["max_real_part"],
        probe.verdict_label()
    );
    check(half.verdict == Verdict::Positive, summary.clone())?;
    check(probe.verdict == Verdict::Heuristic && collisions == 0.0, summary.clone())?;
    if let Some((x, eig)) = example {
        return Err(format!(
            "{off} of {points} sampled points have spectra other than {{{want_lo}, {want_hi}}}, e.g. at ({:.3}, {:.3}): {:.3}{:+.3}i, {:.3}{:+.3}i; {summary}",
            x[0], x[1], eig[0].re, eig[0].im, eig[1].re, eig[1].im
        ));
    }
    Ok(format!("eigenvalues {{{want_lo}, {want_hi}}} at all {points} points; {summary}"))
}

fn criterion_7() -> Outcome {
    let e = entry("shear_abs");
    let x = dvector![0.0, 0.0];
    let tol = 1e-6;
    let report = inverse_differential_report(&e.map, &x, 101, tol).map_err(err)?;
    let p = clarke_at(&e.map, &x, &ClarkeConfig::default()).map_err(err)?;
    let inv = hull_of_inverses(&p, 101).map_err(err)?;
    for target in [dmatrix![1.0, -1.0; 0.0, 1.0], dmatrix![1.0, 1.0; 0.0, 1.0]] {
        let found = report.estimated.iter().find(|j| linalg::frobenius_distance(j, &target) <= tol);
        let j = found.ok_or_else(|| format!("no estimate near {target:?}"))?;
        check(inv.distance_to(j) <= tol, format!("estimate {j:?} outside the hull"))?;
    }
    check(report.included, format!("distances {:?}", report.distances))?;
    let slack = report.norm_bound - report.measured_norm;
    check(slack >= -tol, format!("norm {} exceeds bound {}", report.measured_norm, report.norm_bound))?;
    let maxd = report.distances.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "both inverse Jacobians found; max hull distance {maxd:.1e}; |||∂g||| = {:.9} ≤ {:.9} (slack {slack:.3e})",
        report.measured_norm, report.norm_bound
    ))
}

fn rotation(n: usize, angle: f64) -> Mat {
    let mut r = Mat::identity(n, n);
    if n >= 2 {
        let (s, c) = angle.sin_cos();
        r[(0, 0)] = c;
        r[(0, 1)] = -s;
        r[(1, 0)] = s;
        r[(1, 1)] = c;
    }
    r
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let cfg = ClarkeConfig::default();
    for e in bundled_corpus().map_err(err)? {
        let n = e.map.dim_in();
        let id = Mat::identity(n, n);
        let rot = rotation(n, PI / 6.0);
        let scale = id.clone() * 2.0;
        let conj: Map = e.map.conjugate_linear(&rot, &scale).map_err(err)?;
        let region = entry_region(&e).map_err(err)?;
        let mut rng = sampling::seeded(8);
        let mut points = vec![e.settings.center.clone(), Vector::zeros(n)];
        points.extend((0..20).map(|_| region.sample(&mut rng)));
        for x in points.iter().filter(|x| e.map.in_domain(x)) {
            let p = clarke_at(&e.map, x, &cfg).map_err(err)?;
            let direct = transport_through_charts(&p, &id, &id).map_err(err)?;
            let q = clarke_at(&conj, &(&rot * x), &cfg).map_err(err)?;
            let back = transport_through_charts(&q, &rot, &(&id * 0.5)).map_err(err)?;
            let d = hausdorff_distance(&direct, &back);
            worst = worst.max(d);
            check(d <= 1e-8, format!("{} at {:?}: Hausdorff {d}", e.name, x.as_slice()))?;
        }
    }
    Ok(format!("max Hausdorff distance after back-composition {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let dom = Polyhedron::from_box(&dvector![-1.0], &dvector![2.0]).map_err(err)?;
    let conformal = FinslerPatch::new(
        dom,
        NormField::Conformal {
            factor: ScalarField::new(|x| x[0].exp()),
            base: Norm::Euclidean,
        },
    );
    let (d1, _) = finsler_distance(&conformal, &dvector![0.0], &dvector![1.0], 1e-3).map_err(err)?;
    check((d1 - (E - 1.0)).abs() <= 1e-3, format!("conformal distance {d1}"))?;
    let bx = Polyhedron::from_box(&dvector![-0.5, -0.5], &dvector![1.5, 1.5]).map_err(err)?;
    let euclid = FinslerPatch::new(bx, NormField::Constant(Norm::Euclidean));
    let (d2, _) = finsler_distance(&euclid, &dvector![0.0, 0.0], &dvector![1.0, 1.0], 0.05).map_err(err)?;
    let rel = (d2 - 2f64.sqrt()).abs() / 2f64.sqrt();
    check(rel <= 0.02, format!("box distance {d2}"))?;
    Ok(format!(
        "conformal d(0,1) = {d1:.6} (e − 1 = {:.6}); box d = {d2:.6} (rel. error {rel:.1e})",
        E - 1.0
    ))
}

fn criterion_10() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(err)?, tempfile::tempdir().map_err(err)?];
    for d in &dirs {
        let out = d.path().to_str().ok_or("temp path")?.to_string();
        let code = main_with_args([
            "lipinv",
            "certify",
            "--map",
            "corpus:shear_abs",
            "--seed",
            "7",
            "--no-timestamp",
            "--out",
            &out,
        ]);
        check(code == 0, format!("certify exited {code}"))?;
    }
    let a = std::fs::read(dirs[0].path().join("certificates.json")).map_err(err)?;
    let b = std::fs::read(dirs[1].path().join("certificates.json")).map_err(err)?;
    check(a == b, "machine-readable outputs differ".into())?;
    Ok(format!("two certify runs with seed 7: {} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact Clarke polytope and co-norm of the shear map", criterion_1),
        ("D+ bounded by the polytope norm", criterion_2),
        ("sampled Lipschitz constant equals the sup polytope norm", criterion_3),
        ("Hadamard positive case 2x + sin x", criterion_4),
        ("Hadamard negative case exp", criterion_5),
        ("spectral and half-plane injectivity", criterion_6),
        ("inverse-differential inclusion", criterion_7),
        ("chart independence", criterion_8),
        ("Finsler distances", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} [{secs:.2} s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} [{secs:.2} s] {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
