use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    EuclideanBall,
    /// The `ℓ^∞` unit ball `[-1, 1]^n`.
    Cube,
}

/// A symmetric convex unit body `K` with `B(0,δ₁) ⊂ K ⊂ B(0,δ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BodySpec {
    pub kind: BodyKind,
    pub dim: usize,
}

impl BodySpec {
    pub fn new(kind: BodyKind, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "body dimension {dim} not in 1..=3"
            )));
        }
        Ok(Self { kind, dim })
    }

    pub fn ball(dim: usize) -> Self {
        Self::new(BodyKind::EuclideanBall, dim).expect("dimension in range")
    }

    pub fn cube(dim: usize) -> Self {
        Self::new(BodyKind::Cube, dim).expect("dimension in range")
    }

    /// Inner radius `δ₁`.
    pub fn inner_radius(&self) -> f64 {
        1.0
    }

    /// Outer radius `δ₂`.
    pub fn outer_radius(&self) -> f64 {
        match self.kind {
            BodyKind::EuclideanBall => 1.0,
            BodyKind::Cube => (self.dim as f64).sqrt(),
        }
    }

    /// Does `y` lie in the body dilated by `r`?
    pub fn contains(&self, y: &[f64], r: f64) -> bool {
        match self.kind {
            BodyKind::EuclideanBall => y.iter().map(|v| v * v).sum::<f64>() <= r * r,
            BodyKind::Cube => y.iter().all(|v| v.abs() <= r),
        }
    }

    /// The body in one dimension is the interval for either kind.
    pub fn is_interval(&self) -> bool {
        self.dim == 1
    }
}
