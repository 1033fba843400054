//! Certificate records and their machine-readable serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use nalgebra::Complex;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::criteria::profile::RadialProfile;
use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    MaximalRank,
    Hadamard,
    Spectral,
    EpsDisc,
    DiscSequence,
    HalfPlane,
    Injectivity,
    LocalInverse,
}

impl Criterion {
    pub const ALL: [Criterion; 8] = [
        Criterion::MaximalRank,
        Criterion::Hadamard,
        Criterion::Spectral,
        Criterion::EpsDisc,
        Criterion::DiscSequence,
        Criterion::HalfPlane,
        Criterion::Injectivity,
        Criterion::LocalInverse,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Criterion::MaximalRank => "maximal_rank",
            Criterion::Hadamard => "hadamard",
            Criterion::Spectral => "spectral",
            Criterion::EpsDisc => "eps_disc",
            Criterion::DiscSequence => "disc_sequence",
            Criterion::HalfPlane => "half_plane",
            Criterion::Injectivity => "injectivity",
            Criterion::LocalInverse => "local_inverse",
        }
    }

    /// Accepts the snake_case key, with `-` allowed in place of `_`.
    pub fn from_key(s: &str) -> Option<Self> {
        let s = s.trim().replace('-', "_");
        Criterion::ALL.into_iter().find(|c| c.key() == s)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Negative,
    Heuristic,
    Inconclusive,
}

impl Verdict {
    pub fn key(&self) -> &'static str {
        match self {
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
            Verdict::Heuristic => "heuristic",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn from_key(s: &str) -> Option<Self> {
        match s.trim() {
            "positive" | "positive-to-horizon" => Some(Verdict::Positive),
            "negative" | "negative-signal" => Some(Verdict::Negative),
            "heuristic" | "heuristic-positive" => Some(Verdict::Heuristic),
            "inconclusive" => Some(Verdict::Inconclusive),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// An explicit point, matrix, eigenvalue or pair backing a verdict.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Witness {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Complex eigenvalue as `[re, im]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Witness {
    pub fn new(label: impl Into<String>) -> Self {
        Witness {
            label: label.into(),
            ..Witness::default()
        }
    }

    pub fn at(mut self, x: &Vector) -> Self {
        self.point = Some(x.iter().copied().collect());
        self
    }

    pub fn paired_with(mut self, y: &Vector) -> Self {
        self.other_point = Some(y.iter().copied().collect());
        self
    }

    pub fn matrix(mut self, m: &Mat) -> Self {
        self.matrix = Some(mat_rows(m));
        self
    }

    pub fn weights(mut self, w: &[f64]) -> Self {
        self.weights = Some(w.to_vec());
        self
    }

    pub fn eigenvalue(mut self, z: Complex<f64>) -> Self {
        self.eigenvalue = Some([z.re, z.im]);
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

pub fn mat_rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Verdict record for one criterion.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Certificate {
    pub criterion: Criterion,
    pub verdict: Verdict,
    /// Whether the verdict rests on certified bounds (as opposed to sampling).
    pub certified: bool,
    /// Radius up to which claims are made.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Numeric evidence: floors, margins, constants, integrals.
    pub evidence: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<RadialProfile>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sub_certificates: Vec<Certificate>,
}

impl Certificate {
    pub fn new(criterion: Criterion, verdict: Verdict) -> Self {
        Certificate {
            criterion,
            verdict,
            certified: false,
            horizon: None,
            parameters: BTreeMap::new(),
            evidence: BTreeMap::new(),
            witnesses: Vec::new(),
            profile: None,
            notes: Vec::new(),
            sub_certificates: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn evidence(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.to_string(), value);
        self
    }

    pub fn witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn certified(mut self, c: bool) -> Self {
        self.certified = c;
        self
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::Positive
    }

    /// Verdict label with the Hadamard-specific wording.
    pub fn verdict_label(&self) -> &'static str {
        match (self.criterion, self.verdict) {
            (Criterion::Hadamard | Criterion::Spectral, Verdict::Positive) => "positive-to-horizon",
            (Criterion::Hadamard | Criterion::Spectral, Verdict::Negative) => "negative-signal",
            (Criterion::Injectivity, Verdict::Heuristic) => "heuristic-positive",
            (_, v) => v.key(),
        }
    }

    /// One-line summary for terminal output.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} ({})",
            self.criterion,
            self.verdict_label(),
            if self.certified { "certified" } else { "sampled" }
        );
        if let Some(t) = self.horizon {
            s.push_str(&format!(", horizon {t}"));
        }
        if let Some(w) = self.witnesses.first() {
            s.push_str(&format!(", witness: {}", w.label));
        }
        s
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct SigFigFormatter {
    inner: PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.$name(w)
        })*
    };
}

impl Formatter for SigFigFormatter {
    delegate!(begin_array, end_array, begin_object, end_object, end_array_value, end_object_value, begin_object_value);

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
}

/// Serialize to pretty JSON with every float written to 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let fmt = SigFigFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let json = to_json(&vec![1.0 / 3.0, 2.0, -0.0]);
        assert!(json.contains("3.3333333333333331e-1"), "{json}");
        assert!(json.contains("2.0000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0], 1.0 / 3.0);
    }

    #[test]
    fn keys_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(Criterion::from_key(c.key()), Some(c));
        }
        assert_eq!(Criterion::from_key("half-plane"), Some(Criterion::HalfPlane));
        assert_eq!(Verdict::from_key("negative-signal"), Some(Verdict::Negative));
    }
}
