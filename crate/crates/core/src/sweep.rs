//! Full-factorial hyperparameter sweeps.
//!
//! Every grid cell runs a batch of independent optimizations, each stopped
//! as soon as the best particle enters the shrunken basin or the step cap is
//! reached. Cells with `mu > lambda` are kept in the table but never run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{normalized_weighted_steps, Param, ParamTuple, SweepCell, DEFAULT_SHRINK};
use crate::engine::{run_stream, Mode, RecordOptions, RunConfig, Simulation};
use crate::error::{invalid, Error, Result};
use crate::exchange::CastParams;
use crate::explorer::ProposalKind;
use crate::objective::ObjectiveSpec;
use crate::randomness::derive_seed;

/// Values taken by one swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueSpec {
    List(Vec<f64>),
    /// `count` equally spaced values from `start` to `end` inclusive.
    Lin { start: f64, end: f64, count: usize },
    /// `count` geometrically spaced values from `start` to `end` inclusive.
    Log { start: f64, end: f64, count: usize },
}

impl ValueSpec {
    pub fn values(&self, name: &'static str) -> Result<Vec<f64>> {
        let check_count = |start: f64, end: f64, count: usize| {
            if count == 0 || (count == 1 && start != end) {
                Err(invalid(name, format!("range [{start}, {end}] needs at least 2 points, got {count}")))
            } else {
                Ok(())
            }
        };
        let values = match *self {
            ValueSpec::List(ref v) => v.clone(),
            ValueSpec::Lin { start, end, count } => {
                check_count(start, end, count)?;
                spaced(start, end, count, |a, b, f| a + (b - a) * f)
            }
            ValueSpec::Log { start, end, count } => {
                if !(start > 0.0 && end > 0.0) {
                    return Err(invalid(name, format!("log spacing needs positive bounds, got [{start}, {end}]")));
                }
                check_count(start, end, count)?;
                let (la, lb) = (start.ln(), end.ln());
                spaced(start, end, count, |_, _, f| (la + (lb - la) * f).exp())
            }
        };
        if values.is_empty() {
            return Err(invalid(name, "value list is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(name, format!("non-finite value {v}")));
        }
        Ok(values)
    }
}

fn spaced(start: f64, end: f64, count: usize, at: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| match i {
            0 => start,
            i if i == count - 1 => end,
            i => at(start, end, i as f64 / (count - 1) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub mu: ValueSpec,
    pub lambda: ValueSpec,
    pub kappa: ValueSpec,
    pub gamma: ValueSpec,
    pub t_var: ValueSpec,
}

impl SweepAxes {
    pub fn get(&self, p: Param) -> &ValueSpec {
        match p {
            Param::Mu => &self.mu,
            Param::Lambda => &self.lambda,
            Param::Kappa => &self.kappa,
            Param::Gamma => &self.gamma,
            Param::TVar => &self.t_var,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub objective: ObjectiveSpec,
    pub particles: usize,
    pub max_steps: u64,
    pub proposal: ProposalKind,
    pub t_bar: f64,
    pub noise_gated: bool,
    pub axes: SweepAxes,
    pub runs_per_cell: usize,
    pub shrink: f64,
    pub seed: u64,
}

impl SweepPlan {
    pub fn new(objective: ObjectiveSpec, particles: usize, max_steps: u64, axes: SweepAxes) -> Self {
        Self {
            objective,
            particles,
            max_steps,
            proposal: ProposalKind::Cauchy,
            t_bar: 0.05,
            noise_gated: false,
            axes,
            runs_per_cell: 20,
            shrink: DEFAULT_SHRINK,
            seed: 0,
        }
    }
}

/// A grid point and whether it satisfies `mu <= lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub params: ParamTuple,
    pub valid: bool,
}

/// Cartesian product of the per-parameter value lists, `mu` outermost and
/// `t_var` innermost.
pub fn expand_grid(plan: &SweepPlan) -> Result<Vec<GridPoint>> {
    let mut points = vec![ParamTuple {
        mu: 0.0,
        lambda: 0.0,
        kappa: 0.0,
        gamma: 0.0,
        t_var: 0.0,
    }];
    for p in Param::ALL {
        let values = plan.axes.get(p).values(p.name())?;
        points = points
            .into_iter()
            .flat_map(|base| {
                values.iter().map(move |&v| {
                    let mut t = base;
                    t.set(p, v);
                    t
                })
            })
            .collect();
    }
    Ok(points
        .into_iter()
        .map(|params| GridPoint {
            valid: params.mu <= params.lambda,
            params,
        })
        .collect())
}

/// Number of steps until the best particle enters the shrunken basin, or
/// `None` if it never does within the cap.
pub fn steps_to_basin(config: &RunConfig, shrink: f64, rng: crate::randomness::RngStream) -> Result<Option<u64>> {
    let mut sim = Simulation::new(&config.objective, config, rng)?;
    for n in 1..=config.steps {
        sim.step()?;
        let best = crate::analysis::best_particle(sim.state());
        if config.objective.in_basin(best.position, shrink) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn cell_config(plan: &SweepPlan, params: &ParamTuple) -> Result<RunConfig> {
    let mut cast = CastParams::new(params.mu, params.lambda, params.kappa, params.gamma, params.t_var, plan.t_bar)?;
    cast.noise_gated = plan.noise_gated;
    let mut config = RunConfig::new(plan.objective.clone(), plan.particles, plan.max_steps, Mode::Cast(cast));
    config.proposal = plan.proposal;
    config.seed = plan.seed;
    config.record = RecordOptions {
        stride: 1,
        histogram_bins: 0,
    };
    config.validate()?;
    Ok(config)
}

/// Runs every valid cell and computes its success statistics.
///
/// Cell `k` draws its runs from `derive_seed(seed, "sweep", k)`, so results
/// do not depend on execution order or worker count.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepCell>> {
    if plan.runs_per_cell == 0 {
        return Err(invalid("runs_per_cell", "must be at least 1"));
    }
    if !(plan.shrink > 0.0 && plan.shrink <= 1.0) {
        return Err(invalid("shrink", format!("must lie in (0, 1], got {}", plan.shrink)));
    }
    let grid = expand_grid(plan)?;
    let configs: Vec<Option<RunConfig>> = grid
        .iter()
        .map(|g| g.valid.then(|| cell_config(plan, &g.params)).transpose())
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_some())
        .flat_map(|(k, _)| (0..plan.runs_per_cell).map(move |r| (k, r)))
        .collect();
    let outcomes: Vec<Option<u64>> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let config = configs[k].as_ref().expect("only valid cells are scheduled");
            let cell_seed = derive_seed(plan.seed, "sweep", k as u64);
            steps_to_basin(config, plan.shrink, run_stream(cell_seed, r as u64))
        })
        .collect::<Result<_>>()?;

    let mut per_cell: Vec<Vec<Option<u64>>> = vec![Vec::new(); grid.len()];
    for (&(k, _), outcome) in jobs.iter().zip(outcomes) {
        per_cell[k].push(outcome);
    }

    let cells: Vec<SweepCell> = grid
        .iter()
        .zip(per_cell)
        .map(|(g, outcomes)| {
            if !g.valid {
                return SweepCell {
                    params: g.params,
                    valid: false,
                    runs: 0,
                    success_rate: None,
                    mean_steps_to_basin: None,
                    normalized_weighted_steps: None,
                };
            }
            let hits: Vec<u64> = outcomes.iter().flatten().copied().collect();
            SweepCell {
                params: g.params,
                valid: true,
                runs: outcomes.len(),
                success_rate: Some(hits.len() as f64 / outcomes.len() as f64),
                mean_steps_to_basin: (!hits.is_empty())
                    .then(|| hits.iter().sum::<u64>() as f64 / hits.len() as f64),
                normalized_weighted_steps: None,
            }
        })
        .collect();

    match normalized_weighted_steps(cells.clone()) {
        Ok(cells) => Ok(cells),
        Err(Error::NoSuccessfulCells) => Ok(cells),
        Err(e) => Err(e),
    }
}

/// One `(mu, lambda)` entry of the sweep heatmap, averaged over the other axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub mu: f64,
    pub lambda: f64,
    pub success_rate: Option<f64>,
    pub mean_steps: Option<f64>,
}

pub fn heatmap(cells: &[SweepCell]) -> Vec<HeatmapCell> {
    let mut keys: Vec<(f64, f64)> = cells.iter().map(|c| (c.params.mu, c.params.lambda)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    keys.into_iter()
        .map(|(mu, lambda)| {
            let slice: Vec<&SweepCell> = cells
                .iter()
                .filter(|c| c.params.mu == mu && c.params.lambda == lambda)
                .collect();
            HeatmapCell {
                mu,
                lambda,
                success_rate: mean(slice.iter().filter_map(|c| c.success_rate).collect()),
                mean_steps: mean(slice.iter().filter_map(|c| c.mean_steps_to_basin).collect()),
            }
        })
        .collect()
}
