//! Fixed-temperature Metropolis exploration applied to every particle.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::randomness::{cauchy, Lane, RngStream};
use crate::state::SwarmState;

/// Swarms at least this large (particles times dimension) explore in parallel.
const PARALLEL_THRESHOLD: usize = 16_384;

/// Proposal noise for candidate moves.
///
/// `Cauchy` draws each coordinate from a Cauchy density of scale `T`.
/// `Gaussian` adds `sqrt(2T)` times a standard normal per coordinate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalKind {
    #[default]
    Cauchy,
    Gaussian,
}

impl ProposalKind {
    /// Adds one draw of proposal noise to `x` in place.
    #[inline]
    pub fn perturb<R: Rng + ?Sized>(self, x: &mut [f64], temperature: f64, rng: &mut R) {
        if temperature == 0.0 {
            return;
        }
        match self {
            ProposalKind::Cauchy => {
                for xi in x.iter_mut() {
                    *xi += cauchy(temperature, rng);
                }
            }
            ProposalKind::Gaussian => {
                let eta = (2.0 * temperature).sqrt();
                for xi in x.iter_mut() {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    *xi += eta * z;
                }
            }
        }
    }
}

impl fmt::Display for ProposalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProposalKind::Cauchy => "cauchy",
            ProposalKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for ProposalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cauchy" => Ok(ProposalKind::Cauchy),
            "gaussian" => Ok(ProposalKind::Gaussian),
            other => Err(crate::error::invalid(
                "proposal",
                format!("expected `cauchy` or `gaussian`, got `{other}`"),
            )),
        }
    }
}

/// Candidate move `x + eta(T) * xi`.
pub fn propose<R: Rng + ?Sized>(x: &[f64], temperature: f64, kind: ProposalKind, rng: &mut R) -> Vec<f64> {
    let mut candidate = x.to_vec();
    kind.perturb(&mut candidate, temperature, rng);
    candidate
}

/// Metropolis acceptance probability. Improvements are always accepted; at
/// zero temperature anything else is rejected.
#[inline]
pub fn accept_probability(f_current: f64, f_candidate: f64, temperature: f64) -> f64 {
    if f_candidate < f_current {
        1.0
    } else if temperature > 0.0 {
        (-(f_candidate - f_current) / temperature).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreStats {
    pub evaluations: usize,
    pub accepted: usize,
}

/// One Metropolis move for every particle at its own temperature.
///
/// Particle `i` draws from `rng.substream(Lane::Explore, step, i)`, so the
/// outcome does not depend on how particles are scheduled. Temperatures are
/// left untouched.
pub fn explore_step<O: Objective + ?Sized>(
    state: &mut SwarmState,
    objective: &O,
    kind: ProposalKind,
    rng: &RngStream,
    step: u64,
) -> Result<ExploreStats> {
    let parallel = state.len() * state.dim() >= PARALLEL_THRESHOLD;
    explore_impl(state, objective, kind, rng, step, parallel)
}

fn explore_impl<O: Objective + ?Sized>(
    state: &mut SwarmState,
    objective: &O,
    kind: ProposalKind,
    rng: &RngStream,
    step: u64,
    parallel: bool,
) -> Result<ExploreStats> {
    let dim = state.dim();
    let n = state.len();
    let SwarmState {
        positions,
        temperatures,
        values,
        ..
    } = state;

    let work = |buf: &mut Vec<f64>, (i, ((x, value), &t)): (usize, ((&mut [f64], &mut f64), &f64))| {
        let mut prng = rng.substream(Lane::Explore, step, i as u64);
        buf.clear();
        buf.extend_from_slice(x);
        kind.perturb(buf, t, &mut prng);
        let f_candidate = objective.eval(buf).map_err(|e| Error::Evaluation {
            particle: i,
            source: Box::new(e),
        })?;
        let p = accept_probability(*value, f_candidate, t);
        let accept = p >= 1.0 || (p > 0.0 && prng.random::<f64>() < p);
        if accept {
            x.copy_from_slice(buf);
            *value = f_candidate;
        }
        Ok::<bool, Error>(accept)
    };

    let accepted = if parallel {
        positions
            .par_chunks_mut(dim)
            .zip(values.par_iter_mut())
            .zip(temperatures.par_iter())
            .enumerate()
            .map_init(|| Vec::with_capacity(dim), work)
            .try_fold(|| 0usize, |acc, r| r.map(|a| acc + usize::from(a)))
            .try_reduce(|| 0, |a, b| Ok(a + b))?
    } else {
        let mut buf = Vec::with_capacity(dim);
        let mut accepted = 0;
        for item in positions
            .chunks_mut(dim)
            .zip(values.iter_mut())
            .zip(temperatures.iter())
            .enumerate()
        {
            accepted += usize::from(work(&mut buf, item)?);
        }
        accepted
    };

    Ok(ExploreStats {
        evaluations: n,
        accepted,
    })
}
