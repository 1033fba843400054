//! Corpus entries, the bundled corpus and corpus loading.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::dmatrix;

use crate::clarke::{MatrixPolytope, PolytopeTag};
use crate::criteria::{Criterion, Verdict};
use crate::error::{Error, Result};
use crate::finsler::FinslerPatch;
use crate::funcorpus::specfile::parse_spec;
use crate::funcorpus::{LipschitzMap, Map};
use crate::linalg::{Mat, Vector};

/// Designator of the corpus shipped with the crate.
pub const BUNDLED: &str = "bundled";

/// Environment variable that replaces the bundled corpus with a directory.
pub const CORPUS_DIR_VAR: &str = "LIPINV_CORPUS_DIR";

const BUNDLED_FILES: [(&str, &str); 4] = [
    ("shear_abs.toml", include_str!("../../corpus/shear_abs.toml")),
    ("exp1d.toml", include_str!("../../corpus/exp1d.toml")),
    ("twoxsin.toml", include_str!("../../corpus/twoxsin.toml")),
    ("neg_cross.toml", include_str!("../../corpus/neg_cross.toml")),
];

pub type KnownClarke = Arc<dyn Fn(&Vector) -> MatrixPolytope + Send + Sync>;

/// Finite prefix of a disc sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscSettings {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    pub threshold: f64,
}

/// Parameters an entry declares for its own certificate runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EntrySettings {
    pub center: Vector,
    pub radius: f64,
    pub radii: Vec<f64>,
    pub eps: f64,
    pub shifts: Vec<f64>,
    pub discs: Option<DiscSettings>,
}

impl EntrySettings {
    pub fn defaults(dim: usize) -> Self {
        EntrySettings {
            center: Vector::zeros(dim),
            radius: 5.0,
            radii: (1..=10).map(f64::from).collect(),
            eps: 0.5,
            shifts: (1..=8).map(|k| 0.5f64.powi(k)).collect(),
            discs: None,
        }
    }
}

/// Grid on which a known inverse is round-trip checked.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCheck {
    pub lo: Vector,
    pub hi: Vector,
    pub points: usize,
}

impl InverseCheck {
    /// Tensor grid with `points` nodes per axis.
    pub fn grid(&self) -> Vec<Vector> {
        let n = self.lo.len();
        let total = self.points.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                Vector::from_fn(n, |i, _| {
                    let k = idx % self.points;
                    idx /= self.points;
                    self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (self.points - 1) as f64
                })
            })
            .collect()
    }
}

#[derive(Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub map: Map,
    pub known_inverse: Option<LipschitzMap>,
    pub known_clarke: Option<KnownClarke>,
    pub expected_verdicts: Vec<(Criterion, Verdict)>,
    pub settings: EntrySettings,
    pub patch: Option<FinslerPatch>,
    pub target_patch: Option<FinslerPatch>,
    pub inverse_check: Option<InverseCheck>,
}

impl fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("name", &self.name)
            .field("map", &self.map)
            .field("known_inverse", &self.known_inverse.is_some())
            .field("known_clarke", &self.known_clarke.is_some())
            .field("expected_verdicts", &self.expected_verdicts)
            .finish()
    }
}

impl CorpusEntry {
    pub fn expected(&self, criterion: Criterion) -> Option<Verdict> {
        self.expected_verdicts.iter().find(|(c, _)| *c == criterion).map(|(_, v)| *v)
    }

    /// Sampled invariants of the map and, when present, the round trip
    /// `f(g(y)) = y` of the known inverse.
    pub fn validate(&self) -> Result<()> {
        self.map
            .validate(256, 0)
            .map_err(|e| Error::Validation(format!("{}: {e}", self.name)))?;
        if let Some(g) = &self.known_inverse {
            let check = self.inverse_check.clone().unwrap_or_else(|| InverseCheck {
                lo: Vector::from_element(self.map.dim_out(), -5.0),
                hi: Vector::from_element(self.map.dim_out(), 5.0),
                points: 11,
            });
            for y in check.grid() {
                let x = g
                    .eval(&y)
                    .map_err(|e| Error::Validation(format!("{}: known inverse fails at {:?}: {e}", self.name, y.as_slice())))?;
                let fx = self
                    .map
                    .eval(&x)
                    .map_err(|e| Error::Validation(format!("{}: known inverse leaves the domain: {e}", self.name)))?;
                let err = (&fx - &y).norm();
                if !(err <= 1e-9 * (1.0 + y.norm())) {
                    return Err(Error::Validation(format!(
                        "{}: known inverse round trip misses by {err:.3e} at {:?}",
                        self.name,
                        y.as_slice()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Hand-derived Clarke differentials of the bundled maps, kept independent
/// of the bundled map files so they can serve as test oracles.
fn bundled_known_clarke(name: &str) -> Option<KnownClarke> {
    let exact = |x: &Vector, gens: Vec<Mat>| MatrixPolytope::new(gens, x.clone(), PolytopeTag::Exact).expect("nonempty");
    match name {
        "shear_abs" => Some(Arc::new(move |x: &Vector| {
            let up = dmatrix![1.0, 1.0; 0.0, 1.0];
            let down = dmatrix![1.0, -1.0; 0.0, 1.0];
            let gens = match x[1] {
                y if y > 0.0 => vec![up],
                y if y < 0.0 => vec![down],
                _ => vec![up, down],
            };
            exact(x, gens)
        })),
        "neg_cross" => Some(Arc::new(move |x: &Vector| {
            let sx: Vec<f64> = if x[0] > 0.0 { vec![1.0] } else if x[0] < 0.0 { vec![-1.0] } else { vec![1.0, -1.0] };
            let sy: Vec<f64> = if x[1] > 0.0 { vec![1.0] } else if x[1] < 0.0 { vec![-1.0] } else { vec![1.0, -1.0] };
            let mut gens = Vec::new();
            for a in &sx {
                for b in &sy {
                    // d/dx 0.3|x| = 0.3 sign(x), d/dy 0.3|y| = 0.3 sign(y)
                    gens.push(dmatrix![-1.0, 0.3 * b; 0.3 * a, -1.0]);
                }
            }
            exact(x, gens)
        })),
        "exp1d" => Some(Arc::new(move |x: &Vector| exact(x, vec![dmatrix![x[0].exp()]]))),
        "twoxsin" => Some(Arc::new(move |x: &Vector| exact(x, vec![dmatrix![2.0 + x[0].cos()]]))),
        _ => None,
    }
}

/// The corpus shipped with the crate (or the directory named by
/// `LIPINV_CORPUS_DIR`, when set).
pub fn bundled_corpus() -> Result<Vec<CorpusEntry>> {
    if let Some(dir) = std::env::var_os(CORPUS_DIR_VAR) {
        return load_dir(Path::new(&dir));
    }
    BUNDLED_FILES
        .iter()
        .map(|(file, text)| {
            let mut e = parse_spec(text).map_err(|err| annotate(err, file))?;
            e.known_clarke = bundled_known_clarke(&e.name);
            Ok(e)
        })
        .collect()
}

fn annotate(err: Error, file: &str) -> Error {
    match err {
        Error::Parse { line, field, message } => Error::Parse {
            line,
            field,
            message: format!("{file}: {message}"),
        },
        Error::Validation(m) => Error::Validation(format!("{file}: {m}")),
        other => other,
    }
}

fn load_file(path: &Path) -> Result<CorpusEntry> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text).map_err(|e| annotate(e, &path.display().to_string()))
}

fn load_dir(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Parse {
            line: None,
            field: "corpus".into(),
            message: format!("no .toml spec files in {}", dir.display()),
        });
    }
    files.iter().map(|p| load_file(p)).collect()
}

/// Load entries from the bundled designator, a directory of `.toml` spec
/// files, or a single spec file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let path = path.as_ref();
    if path.as_os_str() == BUNDLED {
        return bundled_corpus();
    }
    if path.is_dir() {
        load_dir(path)
    } else {
        Ok(vec![load_file(path)?])
    }
}
