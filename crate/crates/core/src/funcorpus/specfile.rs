//! The function-spec file format (TOML).
//!
//! ```toml
//! [map]
//! name = "shear_abs"
//! kind = "pwa"            # or "expr"
//! dim = 2                 # or dim_in / dim_out
//!
//! [piece.0]
//! a = "1, 1; 0, 1"        # row-major, rows separated by ';'
//! b = "0, 0"
//! cell = "0, -1, 0"       # rows `a1, …, am, c` meaning ⟨a, x⟩ ≤ c
//!
//! [inverse]
//! components = ["y0 - abs(y1)", "y1"]
//!
//! [expect]
//! maximal_rank = "positive"
//! ```

use std::collections::BTreeMap;

use toml::{Table, Value};

use crate::criteria::{Criterion, Verdict};
use crate::error::{Error, Result};
use crate::finsler::{FinslerPatch, Norm, NormField, ScalarField};
use crate::funcorpus::corpus::{CorpusEntry, DiscSettings, EntrySettings, InverseCheck};
use crate::funcorpus::{AffinePiece, HalfSpace, LipschitzMap, Map, Polyhedron, PwaMap};
use crate::linalg::{Mat, Vector};

struct Doc<'a> {
    text: &'a str,
}

impl Doc<'_> {
    /// 1-based line of `key` inside `[section]`, or of the header itself.
    fn line_of(&self, section: &str, key: Option<&str>) -> Option<usize> {
        let mut current = String::new();
        let mut header_line = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                current = line.trim_start_matches('[').trim_end_matches(']').trim().to_string();
                if current == section && header_line.is_none() {
                    header_line = Some(i + 1);
                }
                continue;
            }
            if current == section {
                if let Some(k) = key {
                    if let Some((lhs, _)) = line.split_once('=') {
                        if lhs.trim() == k {
                            return Some(i + 1);
                        }
                    }
                }
            }
        }
        header_line
    }

    fn err(&self, section: &str, key: Option<&str>, message: impl Into<String>) -> Error {
        let field = match key {
            Some(k) => format!("{section}.{k}"),
            None => section.to_string(),
        };
        Error::Parse {
            line: self.line_of(section, key),
            field,
            message: message.into(),
        }
    }
}

struct Section<'a, 'd> {
    doc: &'d Doc<'a>,
    name: String,
    table: &'d Table,
}

impl Section<'_, '_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        self.doc.err(&self.name, Some(key), message)
    }

    fn opt(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn req(&self, key: &str) -> Result<&Value> {
        self.opt(key).ok_or_else(|| self.doc.err(&self.name, None, format!("missing key `{key}`")))
    }

    fn str_opt(&self, key: &str) -> Result<Option<&str>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn string(&self, key: &str) -> Result<&str> {
        self.req(key)?;
        Ok(self.str_opt(key)?.expect("checked above"))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.opt(key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| self.err(key, "expected a number")),
        }
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.err(key, "expected a nonnegative integer")),
        }
    }

    fn bool_opt(&self, key: &str) -> Result<Option<bool>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.err(key, "expected true or false")),
        }
    }

    fn vec_opt(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(as_f64)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| self.err(key, "expected an array of numbers")),
            Some(v) => as_f64(v).map(|x| Some(vec![x])).ok_or_else(|| self.err(key, "expected an array of numbers")),
        }
    }

    fn strings_opt(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| self.err(key, "expected an array of strings")),
            Some(Value::String(s)) => Ok(Some(vec![s.clone()])),
            Some(_) => Err(self.err(key, "expected an array of strings")),
        }
    }

    fn string_matrix_opt(&self, key: &str) -> Result<Option<Vec<Vec<String>>>> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| match r {
                    Value::Array(c) => c.iter().map(|v| v.as_str().map(str::to_string)).collect::<Option<Vec<_>>>(),
                    Value::String(s) => Some(vec![s.clone()]),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| self.err(key, "expected an array of arrays of strings")),
            Some(_) => Err(self.err(key, "expected an array of arrays of strings")),
        }
    }

    fn rows(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.str_opt(key)? {
            None => Ok(None),
            Some(s) => parse_rows(s).map(Some).map_err(|m| self.err(key, m)),
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Parse `"1, 2; 3, 4"` into rows of numbers.
fn parse_rows(s: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{}` is not a decimal number", v.trim())))
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.len() != first.len()) {
            return Err("rows have different lengths".into());
        }
    }
    Ok(rows)
}

fn rows_to_mat(rows: &[Vec<f64>]) -> Mat {
    let ncols = rows.first().map_or(0, Vec::len);
    Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Parse a radii list: `a..b`, `a..b..step`, or comma-separated values.
/// The default step of a range is `(b − a)/20`.
pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let bad = |m: &str| Error::parse("radii", format!("`{s}`: {m}"));
    let values = if s.contains("..") {
        let parts: Vec<&str> = s.split("..").collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad("expected a..b or a..b..step"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad("bounds must be decimal numbers"));
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let step = if parts.len() == 3 { num(parts[2])? } else { (b - a) / 20.0 };
        if !(b > a) || !(step > 0.0) {
            return Err(bad("need a < b and a positive step"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (0..=count).map(|k| a + k as f64 * step).collect();
        if (v.last().copied().unwrap_or(a) - b).abs() > 1e-9 * b.abs().max(1.0) {
            v.push(b);
        } else if let Some(last) = v.last_mut() {
            *last = b;
        }
        v
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("values must be decimal numbers")))
            .collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|r| !(*r > 0.0)) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("radii must be positive and strictly increasing"));
    }
    Ok(values)
}

/// Parse one function-spec document into a validated corpus entry.
pub fn parse_spec(text: &str) -> Result<CorpusEntry> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line: Some(1),
            field: "map".into(),
            message: "empty document".into(),
        });
    }
    let root: Table = text.parse::<Table>().map_err(|e| Error::Parse {
        line: e.span().map(|sp| text[..sp.start.min(text.len())].lines().count().max(1)),
        field: "document".into(),
        message: e.message().to_string(),
    })?;
    let doc = Doc { text };
    let section = |name: &str| -> Result<Option<Section<'_, '_>>> {
        match root.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section {
                doc: &doc,
                name: name.to_string(),
                table: t,
            })),
            Some(_) => Err(doc.err(name, None, "expected a section")),
        }
    };

    let map_sec = section("map")?.ok_or_else(|| doc.err("map", None, "missing [map] section"))?;
    let name = map_sec.string("name")?.to_string();
    let description = map_sec.str_opt("description")?.unwrap_or_default().to_string();
    let kind = map_sec.string("kind")?;
    let dim = map_sec.usize_opt("dim")?;
    let dim_in = map_sec
        .usize_opt("dim_in")?
        .or(dim)
        .ok_or_else(|| map_sec.err("dim", "missing dimension (`dim` or `dim_in`)"))?;
    let dim_out = map_sec.usize_opt("dim_out")?.or(dim).unwrap_or(dim_in);
    if dim_in == 0 || dim_out == 0 {
        return Err(map_sec.err("dim", "dimensions must be positive"));
    }
    let domain = parse_domain(&map_sec, dim_in)?;

    let map = match kind {
        "pwa" => {
            let pieces_tbl = match root.get("piece") {
                Some(Value::Table(t)) => t,
                _ => return Err(doc.err("map", Some("kind"), "a pwa map needs [piece.N] sections")),
            };
            let mut keyed: Vec<(usize, &Table)> = Vec::new();
            for (k, v) in pieces_tbl {
                let idx = k
                    .parse::<usize>()
                    .map_err(|_| doc.err(&format!("piece.{k}"), None, "piece sections must be numbered"))?;
                let t = v
                    .as_table()
                    .ok_or_else(|| doc.err(&format!("piece.{k}"), None, "expected a section"))?;
                keyed.push((idx, t));
            }
            keyed.sort_by_key(|(i, _)| *i);
            let mut pieces = Vec::with_capacity(keyed.len());
            for (idx, t) in keyed {
                let sec = Section {
                    doc: &doc,
                    name: format!("piece.{idx}"),
                    table: t,
                };
                let a = sec.rows("a")?.ok_or_else(|| sec.err("a", "missing matrix `a`"))?;
                let a = rows_to_mat(&a);
                if a.shape() != (dim_out, dim_in) {
                    return Err(sec.err("a", format!("expected a {dim_out}x{dim_in} matrix, found {}x{}", a.nrows(), a.ncols())));
                }
                let b = match sec.rows("b")? {
                    None => Vector::zeros(dim_out),
                    Some(rows) => {
                        let flat: Vec<f64> = rows.into_iter().flatten().collect();
                        if flat.len() != dim_out {
                            return Err(sec.err("b", format!("expected {dim_out} entries")));
                        }
                        Vector::from_vec(flat)
                    }
                };
                let cell_rows = sec.rows("cell")?.unwrap_or_default();
                let mut hs = Vec::with_capacity(cell_rows.len());
                for r in &cell_rows {
                    if r.len() != dim_in + 1 {
                        return Err(sec.err("cell", format!("each inequality needs {} numbers", dim_in + 1)));
                    }
                    hs.push(HalfSpace::new(Vector::from_column_slice(&r[..dim_in]), r[dim_in]));
                }
                let cell = Polyhedron::new(dim_in, hs).map_err(|e| sec.err("cell", e.to_string()))?;
                pieces.push(AffinePiece::new(a, b, cell).map_err(|e| sec.err("a", e.to_string()))?);
            }
            Map::Pwa(PwaMap::new(pieces, domain).map_err(|e| Error::Validation(format!("{name}: {e}")))?)
        }
        "expr" => {
            let comps = map_sec
                .strings_opt("components")?
                .ok_or_else(|| map_sec.err("components", "missing component expressions"))?;
            if comps.len() != dim_out {
                return Err(map_sec.err("components", format!("expected {dim_out} expressions")));
            }
            let jac = map_sec.string_matrix_opt("jacobian")?;
            let mut m = LipschitzMap::from_expressions(dim_in, &comps, jac.as_deref())
                .map_err(|e| map_sec.err("components", e.to_string()))?
                .with_domain(domain)
                .with_smooth(map_sec.bool_opt("smooth")?.unwrap_or(false));
            if let Some(k) = map_sec.f64_opt("lipschitz_bound")? {
                if !(k > 0.0) {
                    return Err(map_sec.err("lipschitz_bound", "must be positive"));
                }
                m = m.with_lipschitz_bound(k);
            }
            Map::Lipschitz(m)
        }
        other => return Err(map_sec.err("kind", format!("unknown map kind `{other}` (expected pwa or expr)"))),
    };

    let mut known_inverse = None;
    let mut inverse_check = None;
    if let Some(sec) = section("inverse")? {
        let comps = sec
            .strings_opt("components")?
            .ok_or_else(|| sec.err("components", "missing inverse expressions"))?;
        if comps.len() != dim_in {
            return Err(sec.err("components", format!("expected {dim_in} expressions")));
        }
        known_inverse = Some(
            LipschitzMap::from_expressions_in(dim_out, &comps, None, 'y').map_err(|e| sec.err("components", e.to_string()))?,
        );
        let lo = sec.vec_opt("check_lo")?;
        let hi = sec.vec_opt("check_hi")?;
        let (lo, hi) = match (lo, hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            (None, None) => (vec![-5.0; dim_out], vec![5.0; dim_out]),
            _ => return Err(sec.err("check_lo", "check_lo and check_hi must be given together")),
        };
        if lo.len() != dim_out || hi.len() != dim_out || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(sec.err("check_lo", format!("need {dim_out} coordinates with lo < hi")));
        }
        inverse_check = Some(InverseCheck {
            lo: Vector::from_vec(lo),
            hi: Vector::from_vec(hi),
            points: sec.usize_opt("check_points")?.unwrap_or(11).max(2),
        });
    }

    let mut expected = Vec::new();
    let mut settings = EntrySettings::defaults(dim_in);
    if let Some(sec) = section("expect")? {
        if let Some(c) = sec.vec_opt("center")? {
            if c.len() != dim_in {
                return Err(sec.err("center", format!("expected {dim_in} coordinates")));
            }
            settings.center = Vector::from_vec(c);
        }
        if let Some(r) = sec.f64_opt("radius")? {
            if !(r > 0.0) {
                return Err(sec.err("radius", "must be positive"));
            }
            settings.radius = r;
        }
        if let Some(r) = sec.str_opt("radii")? {
            settings.radii = parse_radii(r).map_err(|e| sec.err("radii", e.to_string()))?;
        }
        if let Some(e) = sec.f64_opt("eps")? {
            if !(e > 0.0) {
                return Err(sec.err("eps", "must be positive"));
            }
            settings.eps = e;
        }
        if let Some(centers) = sec.vec_opt("disc_centers")? {
            let radii = sec.vec_opt("disc_radii")?.unwrap_or_else(|| vec![0.1; centers.len()]);
            if radii.len() != centers.len() {
                return Err(sec.err("disc_radii", "needs one radius per disc center"));
            }
            settings.discs = Some(DiscSettings {
                centers,
                radii,
                threshold: sec.f64_opt("disc_threshold")?.unwrap_or(1e-3),
            });
        }
        if let Some(s) = sec.vec_opt("shifts")? {
            settings.shifts = s;
        }
        for c in Criterion::ALL {
            if let Some(v) = sec.str_opt(c.key())? {
                let verdict = Verdict::from_key(v)
                    .ok_or_else(|| sec.err(c.key(), format!("unknown verdict `{v}`")))?;
                expected.push((c, verdict));
            }
        }
        let known: Vec<&str> = [
            "center", "radius", "radii", "eps", "disc_centers", "disc_radii", "disc_threshold", "shifts",
        ]
        .into_iter()
        .chain(Criterion::ALL.iter().map(|c| c.key()))
        .collect();
        if let Some(k) = sec.table.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(sec.err(k, "unknown key"));
        }
    }

    let patch = section("patch")?.map(|s| parse_patch(&s, dim_in)).transpose()?;
    let target_patch = section("target_patch")?.map(|s| parse_patch(&s, dim_out)).transpose()?;

    let entry = CorpusEntry {
        name,
        description,
        map,
        known_inverse,
        known_clarke: None,
        expected_verdicts: expected,
        settings,
        patch,
        target_patch,
        inverse_check,
    };
    entry.validate()?;
    Ok(entry)
}

fn parse_domain(sec: &Section<'_, '_>, dim: usize) -> Result<Polyhedron> {
    let lo = sec.vec_opt("domain_lo")?;
    let hi = sec.vec_opt("domain_hi")?;
    let mut hs = Vec::new();
    match (lo, hi) {
        (None, None) => {}
        (Some(lo), Some(hi)) => {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                return Err(sec.err("domain_lo", format!("need {dim} coordinates with lo < hi")));
            }
            let b = Polyhedron::from_box(&Vector::from_vec(lo), &Vector::from_vec(hi))?;
            hs.extend(b.halfspaces().iter().cloned());
        }
        _ => return Err(sec.err("domain_lo", "domain_lo and domain_hi must be given together")),
    }
    if let Some(rows) = sec.rows("domain")? {
        for r in rows {
            if r.len() != dim + 1 {
                return Err(sec.err("domain", format!("each inequality needs {} numbers", dim + 1)));
            }
            hs.push(HalfSpace::new(Vector::from_column_slice(&r[..dim]), r[dim]));
        }
    }
    Polyhedron::new(dim, hs).map_err(|e| sec.err("domain", e.to_string()))
}

fn parse_base_norm(sec: &Section<'_, '_>, key: &str, name: &str, dim: usize) -> Result<Norm> {
    match name {
        "euclidean" => Ok(Norm::Euclidean),
        "weighted-lp" => {
            let weights = sec.vec_opt("weights")?.unwrap_or_else(|| vec![1.0; dim]);
            if weights.len() != dim || weights.iter().any(|w| !(*w > 0.0)) {
                return Err(sec.err("weights", format!("need {dim} positive weights")));
            }
            let p = sec.f64_opt("p")?.unwrap_or(2.0);
            if !(p >= 1.0) {
                return Err(sec.err("p", "p must be at least 1 (use inf via a large value)"));
            }
            Ok(Norm::WeightedLp {
                weights: Vector::from_vec(weights),
                p,
            })
        }
        other => Err(sec.err(key, format!("unknown norm `{other}`"))),
    }
}

fn parse_patch(sec: &Section<'_, '_>, dim: usize) -> Result<FinslerPatch> {
    let domain = parse_domain(sec, dim)?;
    let norm = sec.str_opt("norm")?.unwrap_or("euclidean");
    let field = match norm {
        "conformal" => {
            let factor = sec.string("factor")?;
            let base = parse_base_norm(sec, "base", sec.str_opt("base")?.unwrap_or("euclidean"), dim)?;
            NormField::Conformal {
                factor: ScalarField::parse(factor, dim).map_err(|e| sec.err("factor", e.to_string()))?,
                base,
            }
        }
        other => NormField::Constant(parse_base_norm(sec, "norm", other, dim)?),
    };
    let mut patch = FinslerPatch::new(domain, field);
    if let Some(m) = sec.f64_opt("modulus")? {
        if !(m >= 0.0) {
            return Err(sec.err("modulus", "must be nonnegative"));
        }
        patch = patch.with_modulus(m);
    }
    Ok(patch)
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_vec(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", "))
}

fn fmt_rows(rows: impl Iterator<Item = Vec<f64>>) -> String {
    rows.map(|r| r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn fmt_halfspaces(hs: &[HalfSpace]) -> String {
    fmt_rows(hs.iter().map(|h| {
        let mut r: Vec<f64> = h.normal.iter().copied().collect();
        r.push(h.offset);
        r
    }))
}

fn write_patch(out: &mut String, header: &str, patch: &FinslerPatch) -> Result<()> {
    out.push_str(&format!("\n[{header}]\n"));
    if !patch.domain().is_whole() {
        out.push_str(&format!("domain = {}\n", quote(&fmt_halfspaces(patch.domain().halfspaces()))));
    }
    let base = |out: &mut String, key: &str, n: &Norm| -> Result<()> {
        match n {
            Norm::Euclidean => out.push_str(&format!("{key} = \"euclidean\"\n")),
            Norm::WeightedLp { weights, p } => {
                out.push_str(&format!("{key} = \"weighted-lp\"\n"));
                out.push_str(&format!("weights = {}\np = {}\n", fmt_vec(weights.as_slice()), fmt_num(*p)));
            }
            _ => return Err(Error::invalid("only registry norms can be serialized")),
        }
        Ok(())
    };
    match patch.field() {
        NormField::Constant(n) => base(out, "norm", n)?,
        NormField::Conformal { factor, base: b } => {
            out.push_str("norm = \"conformal\"\n");
            let src = factor
                .source()
                .ok_or_else(|| Error::invalid("conformal factor has no expression source"))?;
            out.push_str(&format!("factor = {}\n", quote(src)));
            base(out, "base", b)?;
        }
        NormField::Custom(_) => return Err(Error::invalid("custom norm fields cannot be serialized")),
    }
    if let Some(m) = patch.modulus() {
        out.push_str(&format!("modulus = {}\n", fmt_num(m)));
    }
    Ok(())
}

/// Serialize an entry back to the spec-file format. Maps built from closures
/// (without expression sources) cannot be serialized.
pub fn serialize_entry(entry: &CorpusEntry) -> Result<String> {
    let mut out = String::new();
    out.push_str("[map]\n");
    out.push_str(&format!("name = {}\n", quote(&entry.name)));
    if !entry.description.is_empty() {
        out.push_str(&format!("description = {}\n", quote(&entry.description)));
    }
    let map = &entry.map;
    out.push_str(&format!("dim_in = {}\ndim_out = {}\n", map.dim_in(), map.dim_out()));
    if !map.domain().is_whole() {
        out.push_str(&format!("domain = {}\n", quote(&fmt_halfspaces(map.domain().halfspaces()))));
    }
    match map {
        Map::Pwa(p) => {
            out.push_str("kind = \"pwa\"\n");
            for (i, piece) in p.pieces().iter().enumerate() {
                out.push_str(&format!("\n[piece.{i}]\n"));
                let a = fmt_rows(piece.matrix.row_iter().map(|r| r.iter().copied().collect()));
                out.push_str(&format!("a = {}\n", quote(&a)));
                out.push_str(&format!("b = {}\n", quote(&fmt_rows(std::iter::once(piece.offset.iter().copied().collect())))));
                out.push_str(&format!("cell = {}\n", quote(&fmt_halfspaces(piece.cell.halfspaces()))));
            }
        }
        Map::Lipschitz(l) => {
            out.push_str("kind = \"expr\"\n");
            let src = l
                .source()
                .ok_or_else(|| Error::invalid("closure-based maps cannot be serialized"))?;
            let strs = |v: &[String]| format!("[{}]", v.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", "));
            out.push_str(&format!("components = {}\n", strs(&src.components)));
            if let Some(j) = &src.jacobian {
                out.push_str(&format!("jacobian = [{}]\n", j.iter().map(|r| strs(r)).collect::<Vec<_>>().join(", ")));
            }
            if l.is_smooth() {
                out.push_str("smooth = true\n");
            }
            if let Some(k) = l.lipschitz_bound() {
                out.push_str(&format!("lipschitz_bound = {}\n", fmt_num(k)));
            }
        }
    }
    if let Some(inv) = &entry.known_inverse {
        let src = inv
            .source()
            .ok_or_else(|| Error::invalid("closure-based inverses cannot be serialized"))?;
        out.push_str("\n[inverse]\n");
        out.push_str(&format!(
            "components = [{}]\n",
            src.components.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", ")
        ));
        if let Some(c) = &entry.inverse_check {
            out.push_str(&format!(
                "check_lo = {}\ncheck_hi = {}\ncheck_points = {}\n",
                fmt_vec(c.lo.as_slice()),
                fmt_vec(c.hi.as_slice()),
                c.points
            ));
        }
    }
    let s = &entry.settings;
    out.push_str("\n[expect]\n");
    out.push_str(&format!("center = {}\n", fmt_vec(s.center.as_slice())));
    out.push_str(&format!("radius = {}\n", fmt_num(s.radius)));
    out.push_str(&format!(
        "radii = {}\n",
        quote(&s.radii.iter().map(|r| fmt_num(*r)).collect::<Vec<_>>().join(", "))
    ));
    out.push_str(&format!("eps = {}\n", fmt_num(s.eps)));
    out.push_str(&format!("shifts = {}\n", fmt_vec(&s.shifts)));
    if let Some(d) = &s.discs {
        out.push_str(&format!(
            "disc_centers = {}\ndisc_radii = {}\ndisc_threshold = {}\n",
            fmt_vec(&d.centers),
            fmt_vec(&d.radii),
            fmt_num(d.threshold)
        ));
    }
    let ordered: BTreeMap<Criterion, Verdict> = entry.expected_verdicts.iter().copied().collect();
    for (c, v) in ordered {
        out.push_str(&format!("{} = \"{}\"\n", c.key(), v.key()));
    }
    if let Some(p) = &entry.patch {
        write_patch(&mut out, "patch", p)?;
    }
    if let Some(p) = &entry.target_patch {
        write_patch(&mut out, "target_patch", p)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_syntax() {
        assert_eq!(parse_radii("1..3..1").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_radii("1..10").unwrap().len(), 21);
        assert_eq!(parse_radii("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_radii("3..1").is_err());
        assert!(parse_radii("1, 1").is_err());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = "[map]\nname = \"m\"\nkind = \"pwa\"\ndim = 1\n\n[piece.0]\na = \"1, x\"\n";
        match parse_spec(text) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, Some(7));
                assert_eq!(field, "piece.0.a");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_spec("[map\nname=1") {
            Err(Error::Parse { line: Some(_), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_spec("  \n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_verdict_is_rejected() {
        let text = "[map]\nname = \"m\"\nkind = \"expr\"\ndim = 1\ncomponents = [\"x0\"]\n[expect]\nhadamard = \"maybe\"\n";
        assert!(matches!(parse_spec(text), Err(Error::Parse { line: Some(7), .. })));
    }
}
