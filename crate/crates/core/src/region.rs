//! Regions of ℝⁿ over which criteria are evaluated.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::sampling;

/// A closed Euclidean ball or an axis-aligned box in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
}

impl Region {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "box region",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(hi.iter()).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid("box region needs lo < hi in every coordinate"));
        }
        Ok(Region::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Box { lo, .. } => lo.len(),
        }
    }

    pub fn center(&self) -> Vector {
        match self {
            Region::Ball { center, .. } => center.clone(),
            Region::Box { lo, hi } => (lo + hi) * 0.5,
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            Region::Ball { center, radius } => (x - center).norm() <= radius + tol,
            Region::Box { lo, hi } => x
                .iter()
                .enumerate()
                .all(|(i, v)| *v >= lo[i] - tol && *v <= hi[i] + tol),
        }
    }

    /// Nearest point of the region.
    pub fn project(&self, x: &Vector) -> Vector {
        match self {
            Region::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center + d * (radius / n)
                }
            }
            Region::Box { lo, hi } => Vector::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i])),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vector {
        match self {
            Region::Ball { center, radius } => sampling::uniform_in_ball(rng, center, *radius),
            Region::Box { lo, hi } => sampling::uniform_in_box(rng, lo, hi),
        }
    }

    /// Deterministic extreme points: the center plus the axis points of a
    /// ball or the corners of a box (corners capped at dimension 10).
    pub fn anchor_points(&self) -> Vec<Vector> {
        let mut out = vec![self.center()];
        match self {
            Region::Ball { center, radius } => {
                for i in 0..center.len() {
                    for sign in [1.0, -1.0] {
                        let mut p = center.clone();
                        p[i] += sign * radius;
                        out.push(p);
                    }
                }
            }
            Region::Box { lo, hi } => {
                let n = lo.len().min(10);
                for mask in 0..(1usize << n) {
                    out.push(Vector::from_fn(lo.len(), |i, _| {
                        if i < n && mask & (1 << i) != 0 {
                            hi[i]
                        } else {
                            lo[i]
                        }
                    }));
                }
            }
        }
        out
    }

    pub fn bounding_box(&self) -> (Vector, Vector) {
        match self {
            Region::Ball { center, radius } => (center.add_scalar(-radius), center.add_scalar(*radius)),
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        match self {
            Region::Ball { radius, .. } => 2.0 * radius,
            Region::Box { .. } => (hi - lo).norm(),
        }
    }

    pub(crate) fn describe(&self) -> RegionRecord {
        match self {
            Region::Ball { center, radius } => RegionRecord {
                kind: "ball",
                center: center.iter().copied().collect(),
                radius: Some(*radius),
                lo: None,
                hi: None,
            },
            Region::Box { lo, hi } => RegionRecord {
                kind: "box",
                center: self.center().iter().copied().collect(),
                radius: None,
                lo: Some(lo.iter().copied().collect()),
                hi: Some(hi.iter().copied().collect()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RegionRecord {
    pub kind: &'static str,
    pub center: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
}
