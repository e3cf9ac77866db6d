//! Benchmark objectives on the rescaled hypercube `[-1, 1]^d`.
//!
//! Particles live in rescaled coordinates. An objective stretches a point by
//! its physical half-width before applying the textbook formula, so the
//! global minimizer sits at the origin in both coordinate systems.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything the swarm can minimize.
///
/// Implementors must be pure: the same point always gives the same value.
pub trait Objective: Send + Sync {
    fn dimension(&self) -> usize;

    /// Evaluates the objective at a point in rescaled coordinates.
    fn eval(&self, x: &[f64]) -> Result<f64>;

    /// Known global minimizer, used by the error metrics.
    fn global_min(&self) -> &[f64];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveId {
    Ackley,
    Rastrigin,
}

impl ObjectiveId {
    /// Physical half-width of the evaluation hypercube.
    pub fn domain_scale(self) -> f64 {
        match self {
            ObjectiveId::Ackley => 32.768,
            ObjectiveId::Rastrigin => 5.12,
        }
    }

    /// Radius of the sup-norm basin of attraction in physical coordinates.
    pub fn physical_basin_radius(self) -> f64 {
        match self {
            ObjectiveId::Ackley => 0.67,
            ObjectiveId::Rastrigin => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveId::Ackley => "ackley",
            ObjectiveId::Rastrigin => "rastrigin",
        }
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ackley" => Ok(ObjectiveId::Ackley),
            "rastrigin" => Ok(ObjectiveId::Rastrigin),
            other => Err(Error::UnknownObjective(other.to_string())),
        }
    }
}

/// A shipped benchmark function together with its basin geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    id: ObjectiveId,
    dimension: usize,
    domain_scale: f64,
    basin_radius_rescaled: f64,
    global_min: Vec<f64>,
}

impl ObjectiveSpec {
    pub fn new(id: ObjectiveId, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(crate::error::invalid("dimension", "must be positive"));
        }
        let domain_scale = id.domain_scale();
        Ok(Self {
            id,
            dimension,
            domain_scale,
            basin_radius_rescaled: id.physical_basin_radius() / domain_scale,
            global_min: vec![0.0; dimension],
        })
    }

    pub fn ackley(dimension: usize) -> Result<Self> {
        Self::new(ObjectiveId::Ackley, dimension)
    }

    pub fn rastrigin(dimension: usize) -> Result<Self> {
        Self::new(ObjectiveId::Rastrigin, dimension)
    }

    pub fn id(&self) -> ObjectiveId {
        self.id
    }

    pub fn domain_scale(&self) -> f64 {
        self.domain_scale
    }

    pub fn basin_radius_rescaled(&self) -> f64 {
        self.basin_radius_rescaled
    }

    /// True iff `x` lies in the open sup-norm ball of radius
    /// `shrink * basin_radius_rescaled` around the global minimizer.
    pub fn in_basin(&self, x: &[f64], shrink: f64) -> bool {
        let radius = shrink * self.basin_radius_rescaled;
        x.iter()
            .zip(&self.global_min)
            .all(|(xi, mi)| (xi - mi).abs() < radius)
    }
}

impl Objective for ObjectiveSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        if let Some((coordinate, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { coordinate, value });
        }
        let s = self.domain_scale;
        let value = match self.id {
            ObjectiveId::Ackley => ackley(x.iter().map(|xi| s * xi), x.len()),
            ObjectiveId::Rastrigin => rastrigin(x.iter().map(|xi| s * xi), x.len()),
        };
        // Round-off can leave Ackley a hair below zero at the minimizer.
        Ok(value.max(0.0))
    }

    fn global_min(&self) -> &[f64] {
        &self.global_min
    }
}

fn ackley(x: impl Iterator<Item = f64>, d: usize) -> f64 {
    let (sq, cos) = x.fold((0.0, 0.0), |(sq, cos), xi| {
        (sq + xi * xi, cos + (2.0 * PI * xi).cos())
    });
    let n = d as f64;
    // Grouped as 20(1 - e^-r) + (e - e^c) so the minimizer evaluates to exactly 0.
    -20.0 * (-0.2 * (sq / n).sqrt()).exp_m1() + (E - (cos / n).exp())
}

fn rastrigin(x: impl Iterator<Item = f64>, d: usize) -> f64 {
    10.0 * d as f64 + x.map(|xi| xi * xi - 10.0 * (2.0 * PI * xi).cos()).sum::<f64>()
}
