//! End-to-end runs of the `lipinv` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::bisect;
use lipinv::funcorpus::{bundled_corpus, serialize_entry};

fn lipinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipinv"))
        .args(args)
        .env_remove("LIPINV_CORPUS_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_spec_file_exits_with_input_status() {
    let o = lipinv(&["certify", "--map", "nosuchfile.spec"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nosuchfile.spec"), "{err}");
}

#[test]
fn malformed_spec_file_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[map]\nname = \"broken\"\nkind = \"pwa\"\ndim = \n").unwrap();
    let o = lipinv(&["certify", "--map", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn invert_two_x_plus_sine_at_ten() {
    let o = lipinv(&["invert", "--map", "corpus:twoxsin", "--target", "10", "--from", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("status: Converged"), "{out}");
    let x: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("x* = ["))
        .and_then(|s| s.strip_suffix(']'))
        .expect("x* line")
        .parse()
        .unwrap();
    let oracle = bisect(|x| 2.0 * x + x.sin() - 10.0, 0.0, 10.0);
    assert!((x - oracle).abs() <= 1e-9, "{x} vs {oracle}");
    let residual: f64 = out.lines().find_map(|l| l.strip_prefix("residual = ")).unwrap().parse().unwrap();
    assert!(residual <= 1e-10);
}

#[test]
fn certify_shear_reports_constant_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = lipinv(&[
        "certify",
        "--map",
        "corpus:shear_abs",
        "--criteria",
        "hadamard,spectral",
        "--radii",
        "1..10",
        "--seed",
        "7",
        "--no-timestamp",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("hadamard: positive-to-horizon"), "{out}");
    assert!(out.contains("spectral: positive-to-horizon"), "{out}");

    let doc = read_json(&dir.path().join("certificates.json"));
    assert!(doc.get("timestamp").is_none());
    assert_eq!(doc["config"]["params"]["seed"], 7);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let hadamard = &doc["results"][0];
    assert_eq!(hadamard["criterion"], "hadamard");
    assert_eq!(hadamard["verdict"], "positive");
    for v in hadamard["profile"]["values"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - inv_phi).abs() < 1e-12);
    }
    assert_eq!(doc["results"][1]["verdict"], "positive");
    for f in ["report.txt", "profile_hadamard.tsv", "profile_spectral.tsv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = |sub: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = sub.to_vec();
        let out = dir.path().to_str().unwrap().to_owned();
        args.extend(["--seed", "3", "--no-timestamp", "--out", &out]);
        assert!(lipinv(&args).status.success());
        let mut files: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    for sub in [
        &["certify", "--map", "corpus:neg_cross", "--criteria", "injectivity,half-plane", "--pairs", "500"][..],
        &["invert", "--map", "corpus:shear_abs", "--target", "3,-2"][..],
        &["profile", "--map", "corpus:twoxsin", "--radii", "1..5..1"][..],
    ] {
        let a = run(sub);
        let b = run(sub);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{sub:?}");
    }
}

#[test]
fn profile_prints_a_tsv_series() {
    let o = lipinv(&["profile", "--map", "corpus:exp1d", "--radii", "1,2,3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t\tvalue\traw"));
    for line in lines.skip(1) {
        let cols: Vec<f64> = line.split('\t').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - (-cols[0]).exp()).abs() <= 1e-6, "{line}");
    }
}

#[test]
fn corpus_gate_passes_on_the_bundled_corpus() {
    let o = lipinv(&["corpus-test"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(" 0 mismatches"));
}

#[test]
fn corpus_directory_variable_overrides_the_bundled_set() {
    let dir = tempfile::tempdir().unwrap();
    let shear = bundled_corpus().unwrap().into_iter().find(|e| e.name == "shear_abs").unwrap();
    let text = serialize_entry(&shear).unwrap().replace("name = \"shear_abs\"", "name = \"my_shear\"");
    std::fs::write(dir.path().join("my_shear.toml"), text).unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_lipinv"))
        .args(["invert", "--map", "corpus:my_shear", "--target", "3,-2"])
        .env("LIPINV_CORPUS_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("x* = [1.0000000000, -2.0000000000]"), "{}", stdout(&o));

    // the bundled names are no longer visible
    let o = Command::new(env!("CARGO_BIN_EXE_lipinv"))
        .args(["invert", "--map", "corpus:twoxsin", "--target", "1"])
        .env("LIPINV_CORPUS_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_lipinv"))
        .arg("corpus-test")
        .env("LIPINV_CORPUS_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("my_shear"));
}

#[test]
fn invalid_arguments_are_input_errors() {
    assert_eq!(lipinv(&["invert", "--map", "corpus:twoxsin", "--target", "1,2"]).status.code(), Some(2));
    assert_eq!(lipinv(&["invert", "--map", "corpus:twoxsin", "--target", "1", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(lipinv(&["certify", "--map", "corpus:twoxsin", "--criteria", "bogus"]).status.code(), Some(2));
}
