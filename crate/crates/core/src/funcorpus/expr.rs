//! Scalar expressions over indexed variables (`x0, x1, …` or `y0, y1, …`).

use std::fmt;

use exmex::{Express, FlatEx};

use crate::error::{Error, Result};
use crate::linalg::Vector;

#[derive(Clone)]
pub struct Expression {
    source: String,
    ast: FlatEx<f64>,
    /// For each variable of `ast` (in exmex order), its coordinate index.
    slots: Vec<usize>,
}

impl Expression {
    /// Parse `source`; every variable must be `{prefix}{i}` with `i < dim`.
    pub fn parse(source: &str, prefix: char, dim: usize) -> Result<Self> {
        let ast = exmex::parse::<f64>(source)
            .map_err(|e| Error::parse("expression", format!("`{source}`: {e}")))?;
        let mut slots = Vec::new();
        for name in ast.var_names() {
            let idx = name
                .strip_prefix(prefix)
                .and_then(|rest| rest.parse::<usize>().ok())
                .filter(|&i| i < dim)
                .ok_or_else(|| {
                    Error::parse(
                        "expression",
                        format!("`{source}`: unknown variable `{name}` (expected {prefix}0..{prefix}{})", dim.saturating_sub(1)),
                    )
                })?;
            slots.push(idx);
        }
        Ok(Expression {
            source: source.to_string(),
            ast,
            slots,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        let vars: Vec<f64> = self.slots.iter().map(|&i| x[i]).collect();
        self.ast.eval(&vars).unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?})", self.source)
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}
