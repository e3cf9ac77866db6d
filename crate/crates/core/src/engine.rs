//! Run orchestration: initialization, the explore/exchange step loop, and
//! per-step diagnostics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{admissible_average, best_particle, mse};
use crate::cooling::{apply_schedule, Schedule};
use crate::error::{invalid, Result};
use crate::exchange::{exchange_step, CastParams};
use crate::explorer::{explore_step, ProposalKind};
use crate::objective::{Objective, ObjectiveSpec};
use crate::randomness::{Lane, RngStream};
use crate::state::SwarmState;

/// Offset that keeps the log of a zero temperature finite.
pub const GEO_MEAN_EPSILON: f64 = 1e-30;

/// How temperatures evolve between exploration moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// Pairwise temperature exchange.
    Cast(CastParams),
    /// Classic annealing: every particle follows the same schedule.
    Baseline(Schedule),
}

impl Mode {
    /// The mean initial temperature.
    pub fn t_bar(&self) -> f64 {
        match self {
            Mode::Cast(p) => p.t_bar,
            Mode::Baseline(s) => s.t0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordOptions {
    /// Record every `stride` steps (and always the last step).
    pub stride: u64,
    /// Temperature histogram bins over `[0, 2 t_bar]`; zero disables it.
    pub histogram_bins: usize,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            histogram_bins: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub objective: ObjectiveSpec,
    pub particles: usize,
    pub steps: u64,
    pub proposal: ProposalKind,
    pub mode: Mode,
    pub seed: u64,
    pub record: RecordOptions,
}

impl RunConfig {
    pub fn new(objective: ObjectiveSpec, particles: usize, steps: u64, mode: Mode) -> Self {
        Self {
            objective,
            particles,
            steps,
            proposal: ProposalKind::Cauchy,
            mode,
            seed: 0,
            record: RecordOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if self.particles == 0 {
            return Err(invalid("particles", "must be at least 1"));
        }
        if self.record.stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        match &self.mode {
            Mode::Cast(p) => {
                p.validate()?;
                if self.particles < 2 {
                    return Err(invalid("particles", "temperature exchange needs at least 2"));
                }
            }
            Mode::Baseline(s) => {
                Schedule::new(s.kind, s.t0)?;
            }
        }
        Ok(())
    }
}

/// Diagnostics captured after one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub best_index: usize,
    pub best_value: f64,
    pub best_temperature: f64,
    pub best_position: Vec<f64>,
    pub best_mse: f64,
    /// MSE of the mean of in-domain particles, if any remain in the domain.
    pub avg_mse: Option<f64>,
    pub m1: f64,
    pub m2: f64,
    pub variance: f64,
    pub geo_mean: f64,
    pub histogram: Vec<u32>,
}

impl StepRecord {
    pub fn capture<O: Objective + ?Sized>(state: &SwarmState, objective: &O, opts: &RecordOptions, t_bar: f64) -> Self {
        let x_star = objective.global_min();
        let best = best_particle(state);
        let best_mse = mse(best.position, x_star).expect("dimensions checked at construction");
        let avg_mse = admissible_average(state).map(|avg| mse(&avg, x_star).expect("same dimension"));
        let n = state.len() as f64;
        let m1 = state.m1();
        let m2 = state.m2();
        let variance = state.temperatures().iter().map(|t| (t - m1) * (t - m1)).sum::<f64>() / n;
        let geo_mean = (state
            .temperatures()
            .iter()
            .map(|t| (t + GEO_MEAN_EPSILON).ln())
            .sum::<f64>()
            / n)
            .exp();
        Self {
            step: state.step(),
            best_index: best.index,
            best_value: best.value,
            best_temperature: best.temperature,
            best_position: best.position.to_vec(),
            best_mse,
            avg_mse,
            m1,
            m2,
            variance,
            geo_mean,
            histogram: histogram(state.temperatures(), opts.histogram_bins, 2.0 * t_bar),
        }
    }
}

/// Counts of `values` in `bins` equal bins over `[0, upper]`; anything above
/// the range lands in the top bin.
pub fn histogram(values: &[f64], bins: usize, upper: f64) -> Vec<u32> {
    let mut counts = vec![0u32; bins];
    if bins == 0 {
        return counts;
    }
    let width = upper / bins as f64;
    for &v in values {
        let b = ((v / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// State diagnostics before the first step.
    pub initial: StepRecord,
    pub records: Vec<StepRecord>,
    pub final_state: SwarmState,
    pub evaluations: u64,
}

/// Draws the initial swarm: positions uniform on `[-1, 1]^d`, temperatures
/// uniform on `[t_var, 2 t_bar - t_var]` for exchange runs and equal to the
/// schedule's start for baseline runs.
pub fn init_state<O: Objective + ?Sized>(objective: &O, config: &RunConfig, rng: &RngStream) -> Result<SwarmState> {
    config.validate()?;
    let mut r = rng.substream(Lane::Init, 0, 0);
    let n = config.particles;
    let d = objective.dimension();
    let positions: Vec<f64> = (0..n * d).map(|_| r.random_range(-1.0..=1.0)).collect();
    let temperatures = match &config.mode {
        Mode::Cast(p) => {
            let (lo, hi) = (p.t_low(), p.t_high());
            (0..n).map(|_| r.random_range(lo..=hi)).collect()
        }
        Mode::Baseline(s) => vec![s.temperature(0); n],
    };
    SwarmState::from_flat(objective, positions, temperatures)
}

/// A run in progress. Exposes single steps so callers can stop early.
pub struct Simulation<'a, O: Objective + ?Sized> {
    objective: &'a O,
    config: &'a RunConfig,
    rng: RngStream,
    state: SwarmState,
    evaluations: u64,
}

impl<'a, O: Objective + ?Sized> Simulation<'a, O> {
    pub fn new(objective: &'a O, config: &'a RunConfig, rng: RngStream) -> Result<Self> {
        let state = init_state(objective, config, &rng)?;
        let evaluations = state.len() as u64;
        Ok(Self {
            objective,
            config,
            rng,
            state,
            evaluations,
        })
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Explores, then updates temperatures.
    pub fn step(&mut self) -> Result<()> {
        let n = self.state.step + 1;
        let stats = explore_step(&mut self.state, self.objective, self.config.proposal, &self.rng, n)?;
        self.evaluations += stats.evaluations as u64;
        match &self.config.mode {
            Mode::Cast(params) => {
                exchange_step(&mut self.state, params, &self.rng, n)?;
            }
            Mode::Baseline(schedule) => apply_schedule(&mut self.state, schedule, n),
        }
        self.state.step = n;
        Ok(())
    }

    pub fn record(&self) -> StepRecord {
        StepRecord::capture(&self.state, self.objective, &self.config.record, self.config.mode.t_bar())
    }

    pub fn into_state(self) -> SwarmState {
        self.state
    }
}

/// Runs the configured benchmark objective.
pub fn run(config: &RunConfig, rng: &RngStream) -> Result<RunTrace> {
    run_objective(&config.objective, config, rng)
}

/// Runs an arbitrary objective with the rest of `config`.
pub fn run_objective<O: Objective + ?Sized>(objective: &O, config: &RunConfig, rng: &RngStream) -> Result<RunTrace> {
    let mut sim = Simulation::new(objective, config, rng.clone())?;
    let initial = sim.record();
    let stride = config.record.stride;
    let mut records = Vec::with_capacity(config.steps.div_ceil(stride) as usize);
    for n in 1..=config.steps {
        sim.step()?;
        if n % stride == 0 || n == config.steps {
            records.push(sim.record());
        }
    }
    let evaluations = sim.evaluations();
    Ok(RunTrace {
        initial,
        records,
        final_state: sim.into_state(),
        evaluations,
    })
}

/// The stream used for run `index` of a batch.
pub fn run_stream(master_seed: u64, index: u64) -> RngStream {
    RngStream::derive(master_seed, "run", index)
}

/// Independent repeats on the current rayon pool. Results come back in run
/// order regardless of how many workers executed them.
pub fn run_batch(config: &RunConfig, n_runs: usize, master_seed: u64) -> Result<Vec<RunTrace>> {
    if n_runs == 0 {
        return Err(invalid("repeats", "must be at least 1"));
    }
    (0..n_runs as u64)
        .into_par_iter()
        .map(|i| run(config, &run_stream(master_seed, i)))
        .collect()
}
