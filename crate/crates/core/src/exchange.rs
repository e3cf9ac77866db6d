//! Pairwise temperature exchange between particles.
//!
//! Each step, disjoint particle pairs are drawn uniformly and every pair
//! updates its two temperatures: when the better-placed particle is also the
//! hotter one, it cools by `lambda` times the gap while its partner warms by
//! `mu` times the gap. Both temperatures then receive multiplicative noise
//! bounded so they can never turn negative.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::randomness::{iround, uniform_symmetric, Lane, RngStream};
use crate::state::SwarmState;

/// Hyperparameters of the collective temperature dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CastParams {
    /// Cooling rate of the better, hotter particle.
    pub lambda: f64,
    /// Warming rate of its partner.
    pub mu: f64,
    /// Fraction of the positivity bound `1 - lambda` used as noise support.
    pub kappa: f64,
    /// Expected number of interactions per particle per step.
    pub gamma: f64,
    /// Offset of the initial temperature range from zero.
    pub t_var: f64,
    /// Mean initial temperature.
    pub t_bar: f64,
    /// Apply interaction noise only to pairs where an indicator fired.
    #[serde(default)]
    pub noise_gated: bool,
}

impl CastParams {
    /// Validated parameter set, in the conventional `(mu, lambda, kappa,
    /// gamma, t_var)` order plus the base temperature.
    pub fn new(mu: f64, lambda: f64, kappa: f64, gamma: f64, t_var: f64, t_bar: f64) -> Result<Self> {
        let params = Self {
            lambda,
            mu,
            kappa,
            gamma,
            t_var,
            t_bar,
            noise_gated: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, format!("must lie in [0, 1], got {v}")))
            }
        };
        unit("lambda", self.lambda)?;
        unit("mu", self.mu)?;
        unit("kappa", self.kappa)?;
        if self.mu > self.lambda {
            return Err(invalid(
                "mu",
                format!("must not exceed lambda ({} > {})", self.mu, self.lambda),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.t_bar > 0.0 && self.t_bar.is_finite()) {
            return Err(invalid("t_bar", format!("must be positive, got {}", self.t_bar)));
        }
        if !(self.t_var > 0.0 && self.t_var < self.t_bar) {
            return Err(invalid(
                "t_var",
                format!("must satisfy 0 < t_var < t_bar = {}, got {}", self.t_bar, self.t_var),
            ));
        }
        Ok(())
    }

    /// Half-width `a = kappa * (1 - lambda)` of the interaction noise.
    pub fn noise_support(&self) -> f64 {
        self.kappa * (1.0 - self.lambda)
    }

    /// Upper end of the initial temperature range, `2 t_bar - t_var`.
    pub fn t_high(&self) -> f64 {
        2.0 * self.t_bar - self.t_var
    }

    /// Lower end of the initial temperature range, `t_var`.
    pub fn t_low(&self) -> f64 {
        self.t_var
    }
}

/// Interaction indicator: the first particle is strictly better placed and
/// strictly hotter than the second.
#[inline]
pub fn chi(f_x: f64, f_xstar: f64, t: f64, t_star: f64) -> bool {
    f_x < f_xstar && t_star < t
}

/// Post-interaction temperatures `(T', T*')` of one pair.
///
/// The noise on each side is proportional to that particle's own
/// pre-interaction temperature.
pub fn interact_pair(
    t: f64,
    t_star: f64,
    f_x: f64,
    f_xstar: f64,
    params: &CastParams,
    rng: &mut RngStream,
) -> (f64, f64) {
    let forward = chi(f_x, f_xstar, t, t_star);
    let backward = chi(f_xstar, f_x, t_star, t);
    let gap = t - t_star;

    let mut t_new = t;
    let mut t_star_new = t_star;
    if forward {
        t_new -= params.lambda * gap;
        t_star_new += params.mu * gap;
    } else if backward {
        t_new -= params.mu * gap;
        t_star_new += params.lambda * gap;
    }

    if !params.noise_gated || forward || backward {
        let a = params.noise_support();
        t_new += t * uniform_symmetric(a, rng);
        t_star_new += t_star * uniform_symmetric(a, rng);
    }

    let scale = t.max(t_star).max(params.t_bar);
    (clamp_rounding(t_new, scale), clamp_rounding(t_star_new, scale))
}

/// Absorbs round-off at the positivity boundary.
#[inline]
fn clamp_rounding(t: f64, scale: f64) -> f64 {
    if t < 0.0 {
        debug_assert!(-t < 1e-12 * scale, "temperature {t} far below zero");
        0.0
    } else {
        t
    }
}

/// Disjoint particle pairs for one step, grouped into rounds.
///
/// `gamma = K + r` yields `K` full rounds, each a uniform random matching of
/// `floor(N/2)` pairs, and one partial round of `iround(r N / 2)` pairs.
pub fn select_pairs(n: usize, gamma: f64, rng: &mut RngStream) -> Result<Vec<Vec<(usize, usize)>>> {
    if n < 2 {
        return Err(Error::TooFewParticles(n));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    let full = gamma.floor();
    let rest = gamma - full;
    let half = n / 2;

    let mut order: Vec<usize> = (0..n).collect();
    let mut matching = |count: usize, rng: &mut RngStream| {
        order.shuffle(rng);
        order.chunks_exact(2).take(count).map(|p| (p[0], p[1])).collect::<Vec<_>>()
    };

    let mut rounds: Vec<Vec<(usize, usize)>> = (0..full as usize).map(|_| matching(half, rng)).collect();
    if rest > 0.0 {
        let count = (iround(rest * n as f64 / 2.0, rng) as usize).min(half);
        if count > 0 {
            rounds.push(matching(count, rng));
        }
    }
    Ok(rounds)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExchangeStats {
    pub pairs: usize,
    pub interactions: usize,
}

/// Applies the pair interaction to every selected pair, round after round.
///
/// Later rounds see the temperatures produced by earlier ones. Positions and
/// cached values are untouched.
pub fn exchange_step(
    state: &mut SwarmState,
    params: &CastParams,
    rng: &RngStream,
    step: u64,
) -> Result<ExchangeStats> {
    let rounds = select_pairs(state.len(), params.gamma, &mut rng.substream(Lane::Pairing, step, 0))?;
    let mut stats = ExchangeStats::default();
    for (i, j) in rounds.into_iter().flatten() {
        let mut prng = rng.substream(Lane::Interaction, step, stats.pairs as u64);
        let (t, ts) = (state.temperatures[i], state.temperatures[j]);
        let (fi, fj) = (state.values[i], state.values[j]);
        if chi(fi, fj, t, ts) || chi(fj, fi, ts, t) {
            stats.interactions += 1;
        }
        let (ti, tj) = interact_pair(t, ts, fi, fj, params, &mut prng);
        state.temperatures[i] = ti;
        state.temperatures[j] = tj;
        stats.pairs += 1;
    }
    Ok(stats)
}
