//! Prescribed cooling schedules for the classic simulated annealing baseline.

use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::SwarmState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// `T0 / ln(n + e)`
    Logarithmic,
    /// `T0 * alpha^n`
    Geometric { alpha: f64 },
    /// Constant `T0`
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub t0: f64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(invalid("t0", format!("must be positive, got {t0}")));
        }
        if let ScheduleKind::Geometric { alpha } = kind {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
            }
        }
        Ok(Self { kind, t0 })
    }

    pub fn logarithmic(t0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Logarithmic, t0)
    }

    pub fn geometric(alpha: f64, t0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Geometric { alpha }, t0)
    }

    pub fn fixed(t0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Fixed, t0)
    }

    /// Temperature after `n` steps.
    pub fn temperature(&self, n: u64) -> f64 {
        match self.kind {
            ScheduleKind::Logarithmic => self.t0 / (n as f64 + E).ln(),
            ScheduleKind::Geometric { alpha } => self.t0 * alpha.powf(n as f64),
            ScheduleKind::Fixed => self.t0,
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Logarithmic => f.write_str("log"),
            ScheduleKind::Geometric { alpha } => write!(f, "geometric:{alpha}"),
            ScheduleKind::Fixed => f.write_str("fixed"),
        }
    }
}

/// Broadcasts the scheduled temperature for step `n` to every particle.
pub fn apply_schedule(state: &mut SwarmState, schedule: &Schedule, n: u64) {
    let t = schedule.temperature(n);
    state.temperatures_mut().fill(t);
}
