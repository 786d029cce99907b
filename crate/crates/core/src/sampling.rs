//! Geometric-gap sampling.
//!
//! Processing each potential update independently with probability `p` is
//! equivalent to drawing the distance to the next processed update from a
//! geometric distribution on `{1, 2, ...}` with mean `1/p`. The sampler keeps
//! that distance as a countdown, so the PRNG is consulted once per processed
//! update instead of once per potential update.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::Error;
use crate::key::{Estimate, Seed};

/// Name of the generator behind every sampler and coin flip, for reports.
pub const PRNG_NAME: &str = "xoshiro256++";

pub(crate) fn rng_from_seed(seed: Seed) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed.0)
}

pub(crate) fn check_probability(p: f64) -> Result<f64, Error> {
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

#[derive(Clone, Debug)]
pub struct SkipSampler {
    p: f64,
    // ln(1 - p); unused when p == 1
    ln_keep: f64,
    rng: Xoshiro256PlusPlus,
    remaining_gap: u64,
    draws: u64,
}

impl SkipSampler {
    pub fn new(p: f64, seed: Seed) -> Result<Self, Error> {
        let p = check_probability(p)?;
        let mut sampler = SkipSampler {
            p,
            ln_keep: (-p).ln_1p(),
            rng: rng_from_seed(seed),
            remaining_gap: 0,
            draws: 0,
        };
        sampler.remaining_gap = sampler.draw_gap();
        Ok(sampler)
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    /// Potential updates left until the next processed one, counting that one.
    pub fn remaining_gap(&self) -> u64 {
        self.remaining_gap
    }

    /// Number of PRNG invocations so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Draws a gap `G` with `P(G = k) = p (1-p)^(k-1)` by inverse transform.
    pub fn draw_gap(&mut self) -> u64 {
        if self.p >= 1.0 {
            return 1;
        }
        self.draws += 1;
        let u: f64 = self.rng.sample(Open01);
        let gap = (u.ln() / self.ln_keep).ceil();
        if gap < 1.0 {
            1
        } else if gap >= u64::MAX as f64 {
            u64::MAX
        } else {
            gap as u64
        }
    }

    /// Consumes one potential update; true when it is to be processed.
    #[inline]
    pub fn should_process(&mut self) -> bool {
        self.remaining_gap -= 1;
        if self.remaining_gap == 0 {
            self.remaining_gap = self.draw_gap();
            true
        } else {
            false
        }
    }

    /// Consumes up to `budget` potential updates, stopping early at the first
    /// processed one. Returns its zero-based offset within the budget, or
    /// `None` after consuming the whole budget without a hit.
    ///
    /// Equivalent to calling [`should_process`](Self::should_process) until
    /// it returns true or `budget` calls are made.
    #[inline]
    pub fn next_within(&mut self, budget: u64) -> Option<u64> {
        if self.remaining_gap > budget {
            self.remaining_gap -= budget;
            None
        } else {
            let offset = self.remaining_gap - 1;
            self.remaining_gap = self.draw_gap();
            Some(offset)
        }
    }
}

/// Scales a sampled count back to the stream: `raw / p`.
pub fn scale_estimate(raw: u64, p: f64) -> Estimate {
    Estimate::new(raw as f64 / p)
}
