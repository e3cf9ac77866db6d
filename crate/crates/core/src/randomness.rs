//! Seeded random streams and the samplers used by the particle dynamics.
//!
//! Every stochastic decision in a run is drawn from a stream derived from
//! `(master seed, tag, index)`. Within a run, [`RngStream::substream`] hands
//! out an independent generator per `(lane, step, index)` so per-particle and
//! per-pair work can be scheduled in any order without changing results.

use std::f64::consts::PI;

use rand::distr::{Distribution, Open01};
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

/// Purpose of a substream within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    Init = 1,
    Explore = 2,
    Pairing = 3,
    Interaction = 4,
}

/// A reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: Xoshiro256PlusPlus,
}

impl RngStream {
    /// Derives a stream from a master seed, a purpose tag and an index.
    pub fn derive(master_seed: u64, tag: &str, index: u64) -> Self {
        let digest = Sha256::new()
            .chain_update(master_seed.to_le_bytes())
            .chain_update((tag.len() as u64).to_le_bytes())
            .chain_update(tag.as_bytes())
            .chain_update(index.to_le_bytes())
            .finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let key = u64::from_le_bytes(seed[..8].try_into().unwrap());
        Self {
            key,
            rng: Xoshiro256PlusPlus::from_seed(seed),
        }
    }

    /// Independent generator for one unit of work inside a run.
    pub fn substream(&self, lane: Lane, step: u64, index: u64) -> Self {
        let mut h = mix64(self.key ^ (lane as u64).wrapping_mul(0xA076_1D64_78BD_642F));
        h = mix64(h ^ step);
        h = mix64(h ^ index.wrapping_mul(0xE703_7ED1_A0B4_28DB));
        Self {
            key: h,
            rng: Xoshiro256PlusPlus::seed_from_u64(h),
        }
    }
}

/// 64-bit finalizer from SplitMix64.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed lineage down to a fresh 64-bit master seed.
pub fn derive_seed(master_seed: u64, tag: &str, index: u64) -> u64 {
    RngStream::derive(master_seed, tag, index).key
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws a Cauchy variate with location 0 and the given scale.
#[inline]
pub fn cauchy<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    scale * (PI * (u - 0.5)).tan()
}

/// `d` independent Cauchy draws of scale `temperature`.
pub fn cauchy_step<R: Rng + ?Sized>(temperature: f64, d: usize, rng: &mut R) -> Vec<f64> {
    if temperature == 0.0 {
        return vec![0.0; d];
    }
    (0..d).map(|_| cauchy(temperature, rng)).collect()
}

/// `d` independent draws of `sqrt(2T) * z` with `z` standard normal.
pub fn gaussian_step<R: Rng + ?Sized>(temperature: f64, d: usize, rng: &mut R) -> Vec<f64> {
    if temperature == 0.0 {
        return vec![0.0; d];
    }
    let eta = (2.0 * temperature).sqrt();
    (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            eta * z
        })
        .collect()
}

/// Uniform draw on `[-a, a]`.
#[inline]
pub fn uniform_symmetric<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    a * (2.0 * rng.random::<f64>() - 1.0)
}

/// Stochastic rounding: `floor(x) + 1` with probability `x - floor(x)`.
pub fn iround<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    debug_assert!(x >= 0.0, "iround of negative value {x}");
    let floor = x.floor();
    let frac = x - floor;
    let bump = frac > 0.0 && rng.random::<f64>() < frac;
    floor as u64 + u64::from(bump)
}
