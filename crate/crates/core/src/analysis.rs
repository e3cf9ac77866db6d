//! Run metrics and sweep post-processing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;
use crate::state::SwarmState;

/// Floor applied to an MSE before taking its logarithm.
pub const LOG_MSE_FLOOR: f64 = 1e-30;

/// Default basin shrink factor for success counting.
pub const DEFAULT_SHRINK: f64 = 0.5;

/// Mean squared error `(1/d) * sum (y_j - x*_j)^2`.
pub fn mse(y: &[f64], x_star: &[f64]) -> Result<f64> {
    if y.len() != x_star.len() {
        return Err(Error::DimensionMismatch {
            expected: x_star.len(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("point"));
    }
    let sum: f64 = y.iter().zip(x_star).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestParticle<'a> {
    pub index: usize,
    pub position: &'a [f64],
    pub temperature: f64,
    pub value: f64,
}

/// The particle with the lowest cached objective value; ties go to the
/// lowest index.
pub fn best_particle(state: &SwarmState) -> BestParticle<'_> {
    let values = state.values();
    let index = (1..values.len()).fold(0, |best, i| if values[i] < values[best] { i } else { best });
    BestParticle {
        index,
        position: state.position(index),
        temperature: state.temperatures()[index],
        value: values[index],
    }
}

/// Mean position of the particles still inside `[-1, 1]^d`.
pub fn admissible_average(state: &SwarmState) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; state.dim()];
    let mut count = 0usize;
    for p in state.positions().filter(|p| p.iter().all(|v| v.abs() <= 1.0)) {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
        count += 1;
    }
    (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
}

/// Whether the best particle entered the shrunken basin at any recorded
/// step, and the first such step.
pub fn success_and_steps(trace: &RunTrace, spec: &ObjectiveSpec, shrink: f64) -> (bool, Option<u64>) {
    let step = trace
        .records
        .iter()
        .find(|r| spec.in_basin(&r.best_position, shrink))
        .map(|r| r.step);
    (step.is_some(), step)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub success: bool,
    pub steps_to_basin: Option<u64>,
    pub final_best_mse: f64,
    pub final_avg_mse: Option<f64>,
}

pub fn summarize(trace: &RunTrace, spec: &ObjectiveSpec, shrink: f64) -> RunSummary {
    let (success, steps_to_basin) = success_and_steps(trace, spec, shrink);
    let last = trace.records.last().unwrap_or(&trace.initial);
    RunSummary {
        success,
        steps_to_basin,
        final_best_mse: last.best_mse,
        final_avg_mse: last.avg_mse,
    }
}

/// Which particle position an error curve follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Best,
    Average,
}

/// `log10` of an MSE with the floor applied.
pub fn log_mse(m: f64) -> f64 {
    m.max(LOG_MSE_FLOOR).log10()
}

/// Per recorded step, the mean over runs of `log10(MSE)`.
///
/// For [`Which::Average`], runs with no in-domain particle at a step are
/// skipped; a step where every run is skipped yields `None`.
pub fn expected_log_mse(traces: &[RunTrace], which: Which) -> Result<Vec<Option<f64>>> {
    let first = traces.first().ok_or(Error::Empty("trace list"))?;
    let len = first.records.len();
    if let Some(t) = traces.iter().find(|t| t.records.len() != len) {
        return Err(Error::LengthMismatch(len, t.records.len()));
    }
    Ok((0..len)
        .map(|k| {
            let (sum, count) = traces
                .iter()
                .filter_map(|t| match which {
                    Which::Best => Some(t.records[k].best_mse),
                    Which::Average => t.records[k].avg_mse,
                })
                .fold((0.0, 0usize), |(s, c), m| (s + log_mse(m), c + 1));
            (count > 0).then(|| sum / count as f64)
        })
        .collect())
}

/// A hyperparameter of the temperature dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Mu,
    Lambda,
    Kappa,
    Gamma,
    TVar,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::Mu, Param::Lambda, Param::Kappa, Param::Gamma, Param::TVar];

    pub fn name(self) -> &'static str {
        match self {
            Param::Mu => "mu",
            Param::Lambda => "lambda",
            Param::Kappa => "kappa",
            Param::Gamma => "gamma",
            Param::TVar => "t_var",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownAxis(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTuple {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub t_var: f64,
}

impl ParamTuple {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Mu => self.mu,
            Param::Lambda => self.lambda,
            Param::Kappa => self.kappa,
            Param::Gamma => self.gamma,
            Param::TVar => self.t_var,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Mu => self.mu = v,
            Param::Lambda => self.lambda = v,
            Param::Kappa => self.kappa = v,
            Param::Gamma => self.gamma = v,
            Param::TVar => self.t_var = v,
        }
    }
}

/// Outcome of one grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub params: ParamTuple,
    /// False when `mu > lambda`; such cells are never run.
    pub valid: bool,
    pub runs: usize,
    pub success_rate: Option<f64>,
    /// Mean steps to basin over the successful runs.
    pub mean_steps_to_basin: Option<f64>,
    pub normalized_weighted_steps: Option<f64>,
}

/// Fills in `normalized_weighted_steps`: mean steps divided by success rate,
/// min-max normalized over the cells with any success.
pub fn normalized_weighted_steps(mut cells: Vec<SweepCell>) -> Result<Vec<SweepCell>> {
    let weight = |c: &SweepCell| match (c.valid, c.success_rate, c.mean_steps_to_basin) {
        (true, Some(rate), Some(steps)) if rate > 0.0 => Some(steps / rate),
        _ => None,
    };
    let weights: Vec<f64> = cells.iter().filter_map(weight).collect();
    if weights.is_empty() {
        return Err(Error::NoSuccessfulCells);
    }
    let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for c in &mut cells {
        c.normalized_weighted_steps = weight(c).map(|w| if hi > lo { (w - lo) / (hi - lo) } else { 0.0 });
    }
    Ok(cells)
}

/// Averages `metric` over every axis except `axis`.
///
/// Returns one `(axis value, mean)` entry per distinct value of `axis`, in
/// ascending order. Cells where the metric is undefined are left out of the
/// mean; a slice with no defined cell gives `None`.
pub fn marginalize<F>(cells: &[SweepCell], axis: Param, metric: F) -> Result<Vec<(f64, Option<f64>)>>
where
    F: Fn(&SweepCell) -> Option<f64>,
{
    if cells.is_empty() {
        return Err(Error::Empty("sweep cells"));
    }
    let mut values: Vec<f64> = cells.iter().map(|c| c.params.get(axis)).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values
        .into_iter()
        .map(|v| {
            let (sum, count) = cells
                .iter()
                .filter(|c| c.params.get(axis) == v)
                .filter_map(&metric)
                .fold((0.0, 0usize), |(s, n), m| (s + m, n + 1));
            (v, (count > 0).then(|| sum / count as f64))
        })
        .collect())
}
