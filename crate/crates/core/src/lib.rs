//! Gradient-free global optimization by collective annealing.
//!
//! A swarm of particles explores with Metropolis moves, each at its own
//! temperature. Instead of following a prescribed cooling schedule, the
//! particles trade temperature in random pairwise encounters: a particle that
//! is both better placed and hotter than its partner hands heat over, so the
//! swarm cools collectively while poorly placed particles keep exploring.
//!
//! The crate also ships classic simulated annealing baselines, the Ackley and
//! Rastrigin benchmarks, run metrics and a hyperparameter sweep driver.

pub mod analysis;
pub mod cooling;
pub mod engine;
pub mod error;
pub mod exchange;
pub mod explorer;
pub mod objective;
pub mod randomness;
mod state;
pub mod sweep;

pub use cooling::{Schedule, ScheduleKind};
pub use engine::{run, run_batch, Mode, RecordOptions, RunConfig, RunTrace, Simulation, StepRecord};
pub use error::{Error, Result};
pub use exchange::CastParams;
pub use explorer::ProposalKind;
pub use objective::{Objective, ObjectiveId, ObjectiveSpec};
pub use randomness::RngStream;
pub use state::SwarmState;
