//! Command-line interface: load a map from a spec file or the corpus, run
//! certificates, inversions and profiles, and write reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::criteria::{
    check_maximal_rank_region, clip_region, disc_sequence_injectivity, hadamard_verdict, half_plane_injectivity,
    radial_profile, spectral_eps_disc, spectral_verdict, to_json, Certificate, Criterion, DiscSpec, ProfileKind,
};
use crate::error::{Error, Result};
use crate::funcorpus::{bundled_corpus, load_corpus, parse_radii, parse_spec, CorpusEntry};
use crate::inverter::{injectivity_probe, lift_path_with, local_inverse_check, LiftOptions};
use crate::linalg::Vector;
use crate::region::Region;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_GRID: usize = 41;
pub const DEFAULT_PAIRS: usize = 10_000;

/// Exit status for malformed inputs (spec files, arguments).
pub const EXIT_INPUT: i32 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lipinv", version, about = "Invertibility certificates and path-lifting inversion for Lipschitz maps")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit the timestamp from machine-readable outputs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run invertibility criteria on a map.
    Certify(CertifyArgs),
    /// Invert a map at a target by path lifting.
    Invert(InvertArgs),
    /// Compute a radial profile m(t) or s(t).
    Profile(ProfileArgs),
    /// Check every corpus entry against its expected verdicts.
    CorpusTest(CorpusTestArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// `corpus:NAME` or a path to a spec file.
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for reports and data series.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated criteria (default: the entry's expected criteria, or all).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<String>,
    /// Radii `a..b`, `a..b..step` or a comma list.
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Random pairs per shift for the injectivity probe.
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: usize,
    /// Disc radius for the eps-disc criterion.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub common: Common,
    /// Target point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub target: String,
    /// Start point, comma-separated (default: the entry's center).
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Conorm,
    Spectral,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "conorm")]
    pub kind: KindArg,
    #[arg(long)]
    pub radii: Option<String>,
    /// Profile center, comma-separated (default: the entry's center).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct CorpusTestArgs {
    /// Corpus directory or file (default: bundled, or `LIPINV_CORPUS_DIR`).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Numeric parameters shared by all criteria runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub samples: usize,
    pub grid: usize,
    pub pairs: usize,
    pub seed: u64,
    pub radii: Option<Vec<f64>>,
    pub eps: Option<f64>,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            samples: DEFAULT_SAMPLES,
            grid: DEFAULT_GRID,
            pairs: DEFAULT_PAIRS,
            seed: DEFAULT_SEED,
            radii: None,
            eps: None,
        }
    }
}

/// Resolve `corpus:NAME` (bundled or `LIPINV_CORPUS_DIR`) or a spec file path.
pub fn load_map_source(src: &str) -> Result<CorpusEntry> {
    if let Some(name) = src.strip_prefix("corpus:") {
        return bundled_corpus()?
            .into_iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::Validation(format!("no corpus entry named `{name}`")));
    }
    let text = fs::read_to_string(src).map_err(|e| Error::Parse {
        line: None,
        field: "map".into(),
        message: format!("cannot read `{src}`: {e}"),
    })?;
    parse_spec(&text).map_err(|e| match e {
        Error::Parse { line, field, message } => Error::Parse {
            line,
            field,
            message: format!("{message} (in `{src}`)"),
        },
        other => other,
    })
}

/// The region an entry's region-based criteria run on: its ball, clipped
/// to the domain horizon.
pub fn entry_region(entry: &CorpusEntry) -> Result<Region> {
    let r = Region::ball(entry.settings.center.clone(), entry.settings.radius)?;
    Ok(clip_region(entry.map.domain(), &r))
}

/// Run one criterion on a corpus entry with its declared settings.
pub fn run_criterion(entry: &CorpusEntry, criterion: Criterion, params: &RunParams) -> Result<Certificate> {
    let map = &entry.map;
    let s = &entry.settings;
    let region = entry_region(entry)?;
    let radii = params.radii.clone().unwrap_or_else(|| s.radii.clone());
    let (samples, grid, seed) = (params.samples, params.grid, params.seed);
    let cert = match criterion {
        Criterion::MaximalRank => check_maximal_rank_region(map, &region, samples, grid, seed)?,
        Criterion::Hadamard => {
            let profile = radial_profile(map, &s.center, &radii, ProfileKind::CoNorm, samples, grid, seed)?;
            let mut c = hadamard_verdict(&profile, None)?;
            c.profile = Some(profile);
            c
        }
        Criterion::Spectral => {
            let profile = radial_profile(map, &s.center, &radii, ProfileKind::SpectralPowerN, samples, grid, seed)?;
            let mut c = spectral_verdict(&profile, None, map.lipschitz_bound())?;
            c.profile = Some(profile);
            c
        }
        Criterion::EpsDisc => spectral_eps_disc(map, &region, params.eps.unwrap_or(s.eps), samples, grid, seed)?,
        Criterion::DiscSequence => {
            let discs = match &s.discs {
                Some(d) => DiscSpec::new(d.centers.clone(), d.radii.clone(), d.threshold)?,
                None => DiscSpec::dyadic(1e-3)?,
            };
            disc_sequence_injectivity(map, &discs, &region, samples, grid, seed)?
        }
        Criterion::HalfPlane => half_plane_injectivity(map, &region, samples, grid, seed)?,
        Criterion::Injectivity => injectivity_probe(map, &region, &s.shifts, params.pairs, seed)?,
        Criterion::LocalInverse => local_inverse_check(map, &s.center, grid)?,
    };
    Ok(cert.param("seed", seed))
}

fn parse_point(s: &str, dim: usize, field: &str) -> Result<Vector> {
    let vals = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("{field}: `{t}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "point argument",
            expected: dim,
            found: vals.len(),
        });
    }
    Ok(Vector::from_vec(vals))
}

fn timestamp(no_timestamp: bool) -> Option<u64> {
    (!no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    map: &'a str,
    config: C,
    results: R,
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

#[derive(Serialize)]
struct CertifyConfig<'a> {
    subcommand: &'static str,
    map: &'a str,
    criteria: Vec<Criterion>,
    params: &'a RunParams,
}

fn certify(args: &CertifyArgs, no_timestamp: bool) -> Result<i32> {
    let entry = load_map_source(&args.common.map)?;
    let criteria: Vec<Criterion> = if args.criteria.is_empty() {
        if entry.expected_verdicts.is_empty() {
            Criterion::ALL.to_vec()
        } else {
            entry.expected_verdicts.iter().map(|(c, _)| *c).collect()
        }
    } else {
        args.criteria
            .iter()
            .map(|k| Criterion::from_key(k).ok_or_else(|| Error::invalid(format!("unknown criterion `{k}`"))))
            .collect::<Result<_>>()?
    };
    let params = RunParams {
        samples: args.samples,
        grid: args.grid,
        pairs: args.pairs,
        seed: args.common.seed,
        radii: args.radii.as_deref().map(parse_radii).transpose()?,
        eps: args.eps,
    };
    let certs = criteria
        .iter()
        .map(|c| run_criterion(&entry, *c, &params))
        .collect::<Result<Vec<_>>>()?;
    println!("map {} (seed {})", entry.name, params.seed);
    let mut report = format!("map: {}\n{}\nseed: {}\n\n", entry.name, entry.description, params.seed);
    for c in &certs {
        println!("{}", c.summary());
        report.push_str(&c.summary());
        report.push('\n');
        for (k, v) in &c.evidence {
            report.push_str(&format!("  {k} = {v:e}\n"));
        }
        for n in &c.notes {
            report.push_str(&format!("  note: {n}\n"));
        }
    }
    if let Some(dir) = &args.common.out {
        let doc = Document {
            tool: "lipinv",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(no_timestamp),
            map: &entry.name,
            config: CertifyConfig {
                subcommand: "certify",
                map: &args.common.map,
                criteria: criteria.clone(),
                params: &params,
            },
            results: &certs,
        };
        write_out(dir, "certificates.json", &to_json(&doc))?;
        write_out(dir, "report.txt", &report)?;
        for c in &certs {
            if let Some(p) = &c.profile {
                write_out(dir, &format!("profile_{}.tsv", c.criterion.key()), &p.to_tsv())?;
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct InvertConfig<'a> {
    subcommand: &'static str,
    map: &'a str,
    from: Vec<f64>,
    target: Vec<f64>,
    tol: f64,
    max_steps: usize,
    seed: u64,
}

fn invert(args: &InvertArgs, no_timestamp: bool) -> Result<i32> {
    if !(args.tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let entry = load_map_source(&args.common.map)?;
    let n = entry.map.dim_in();
    let target = parse_point(&args.target, entry.map.dim_out(), "target")?;
    let from = match &args.from {
        Some(s) => parse_point(s, n, "from")?,
        None => entry.settings.center.clone(),
    };
    let opts = LiftOptions {
        tol: args.tol,
        max_steps: args.max_steps,
        seed: args.common.seed,
        ..LiftOptions::default()
    };
    let r = lift_path_with(&entry.map, &from, &target, &opts)?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(", ");
    println!("status: {:?}", r.status);
    println!("x* = [{}]", fmt(&r.preimage));
    println!("residual = {:e}", r.residual);
    println!("steps = {}", r.steps);
    if let Some(dir) = &args.common.out {
        let doc = Document {
            tool: "lipinv",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(no_timestamp),
            map: &entry.name,
            config: InvertConfig {
                subcommand: "invert",
                map: &args.common.map,
                from: from.iter().copied().collect(),
                target: target.iter().copied().collect(),
                tol: args.tol,
                max_steps: args.max_steps,
                seed: args.common.seed,
            },
            results: &r,
        };
        write_out(dir, "inversion.json", &to_json(&doc))?;
        write_out(dir, "trace.tsv", &r.trace_tsv())?;
    }
    Ok(0)
}

fn profile(args: &ProfileArgs, no_timestamp: bool) -> Result<i32> {
    let entry = load_map_source(&args.common.map)?;
    let center = match &args.center {
        Some(s) => parse_point(s, entry.map.dim_in(), "center")?,
        None => entry.settings.center.clone(),
    };
    let radii = match &args.radii {
        Some(r) => parse_radii(r)?,
        None => entry.settings.radii.clone(),
    };
    let kind = match args.kind {
        KindArg::Conorm => ProfileKind::CoNorm,
        KindArg::Spectral => ProfileKind::SpectralPowerN,
    };
    let p = radial_profile(&entry.map, &center, &radii, kind, args.samples, args.grid, args.common.seed)?;
    print!("{}", p.to_tsv());
    if let Some(dir) = &args.common.out {
        let doc = Document {
            tool: "lipinv",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(no_timestamp),
            map: &entry.name,
            config: serde_json::json!({
                "subcommand": "profile",
                "map": args.common.map,
                "samples": args.samples,
                "grid": args.grid,
                "seed": args.common.seed,
            }),
            results: &p,
        };
        write_out(dir, "profile.json", &to_json(&doc))?;
        write_out(dir, "profile.tsv", &p.to_tsv())?;
    }
    Ok(0)
}

/// One expected-versus-computed comparison of the corpus gate.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusCheck {
    pub entry: String,
    pub criterion: Criterion,
    pub expected: crate::criteria::Verdict,
    pub computed: crate::criteria::Verdict,
}

impl CorpusCheck {
    pub fn matches(&self) -> bool {
        self.expected == self.computed
    }
}

/// Run every expected verdict of every entry.
pub fn corpus_checks(entries: &[CorpusEntry], params: &RunParams) -> Result<Vec<CorpusCheck>> {
    let mut out = Vec::new();
    for e in entries {
        for (c, v) in &e.expected_verdicts {
            let cert = run_criterion(e, *c, params)?;
            out.push(CorpusCheck {
                entry: e.name.clone(),
                criterion: *c,
                expected: *v,
                computed: cert.verdict,
            });
        }
    }
    Ok(out)
}

fn corpus_test(args: &CorpusTestArgs, no_timestamp: bool) -> Result<i32> {
    let entries = match &args.corpus {
        Some(p) => load_corpus(p)?,
        None => bundled_corpus()?,
    };
    let params = RunParams {
        samples: args.samples,
        grid: args.grid,
        pairs: args.pairs,
        seed: args.seed,
        ..RunParams::default()
    };
    let checks = corpus_checks(&entries, &params)?;
    let mut mismatches = 0;
    for c in &checks {
        let tag = if c.matches() { "ok" } else { "MISMATCH" };
        if !c.matches() {
            mismatches += 1;
        }
        println!("{tag:8} {:12} {:14} expected {:12} computed {}", c.entry, c.criterion.key(), c.expected.key(), c.computed.key());
    }
    println!("{} checks, {} mismatches", checks.len(), mismatches);
    if let Some(dir) = &args.out {
        let doc = Document {
            tool: "lipinv",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(no_timestamp),
            map: "corpus",
            config: &params,
            results: &checks,
        };
        write_out(dir, "corpus_test.json", &to_json(&doc))?;
    }
    Ok(if mismatches == 0 { 0 } else { 1 })
}

/// Exit status for an error: 2 for input problems, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::Io(_)
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::PointOutsideDomain { .. } => EXIT_INPUT,
        _ => EXIT_NUMERIC,
    }
}

/// Execute a parsed command line and return the process exit status.
pub fn run(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    let result = match &cli.command {
        Command::Certify(a) => certify(a, cli.no_timestamp),
        Command::Invert(a) => invert(a, cli.no_timestamp),
        Command::Profile(a) => profile(a, cli.no_timestamp),
        Command::CorpusTest(a) => corpus_test(a, cli.no_timestamp),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                0
            }
        }
    }
}
