use crate::error::{Error, Result};
use crate::objective::Objective;

/// Positions, temperatures and cached objective values of `N` particles.
///
/// Positions are stored row-major, one row of `dim` coordinates per particle.
/// `values[i]` always equals the objective at particle `i`'s position at a
/// step boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    dim: usize,
    pub(crate) positions: Vec<f64>,
    pub(crate) temperatures: Vec<f64>,
    pub(crate) values: Vec<f64>,
    pub(crate) step: u64,
}

impl SwarmState {
    /// Builds a state and evaluates the objective at every position.
    pub fn new<O: Objective + ?Sized>(
        objective: &O,
        positions: Vec<Vec<f64>>,
        temperatures: Vec<f64>,
    ) -> Result<Self> {
        let dim = objective.dimension();
        if positions.len() != temperatures.len() {
            return Err(Error::DimensionMismatch {
                expected: positions.len(),
                actual: temperatures.len(),
            });
        }
        let mut flat = Vec::with_capacity(positions.len() * dim);
        for p in &positions {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(objective, flat, temperatures)
    }

    pub(crate) fn from_flat<O: Objective + ?Sized>(
        objective: &O,
        positions: Vec<f64>,
        temperatures: Vec<f64>,
    ) -> Result<Self> {
        let dim = objective.dimension();
        if let Some(t) = temperatures.iter().find(|t| t.is_nan() || **t < 0.0) {
            return Err(crate::error::invalid(
                "temperature",
                format!("must be non-negative, got {t}"),
            ));
        }
        let values = positions
            .chunks_exact(dim)
            .enumerate()
            .map(|(particle, x)| {
                objective.eval(x).map_err(|e| Error::Evaluation {
                    particle,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            positions,
            temperatures,
            values,
            step: 0,
        })
    }

    /// Replaces the cached objective values without re-evaluating.
    ///
    /// Only the pairing logic reads cached values, so tests use this to pose
    /// exact interaction scenarios.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        self.values = values;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.dim)
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn temperatures_mut(&mut self) -> &mut [f64] {
        &mut self.temperatures
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean temperature.
    pub fn m1(&self) -> f64 {
        self.temperatures.iter().sum::<f64>() / self.len() as f64
    }

    /// Mean squared temperature.
    pub fn m2(&self) -> f64 {
        self.temperatures.iter().map(|t| t * t).sum::<f64>() / self.len() as f64
    }
}
