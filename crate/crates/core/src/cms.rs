//! Count-Min Sketch over `d` rows of `w` counters.
//!
//! Three update rules share the same grid and query:
//! - `Conservative` increments only the mapped counters currently at the minimum.
//! - `Plain` increments every mapped counter.
//! - `Nitro` treats the `d` mapped counters of each item as consecutive
//!   potential updates of one geometric-gap sampler and increments only the
//!   sampled ones; a gap may span several items, so with `p < 1/d` whole items
//!   are skipped without hashing. Counters hold raw sample counts and queries
//!   scale by `1/p`.
//!
//! Row `i` maps a key with an independently seeded 64-bit hash reduced modulo `w`.

use std::f64::consts::E;

use crate::error::{Error, TableFull};
use crate::estimator::{FrequencyEstimator, COUNTER_BYTES};
use crate::key::{Estimate, FlowKey, Seed};
use crate::sampling::{check_probability, scale_estimate, SkipSampler};

// absorbs rounding in e/eps and ln(1/delta) at exact integers
const DIM_SLACK: f64 = 1e-9;

/// `(w, d) = (ceil(e / epsilon), ceil(ln(1 / delta)))`.
pub fn cms_dims(epsilon: f64, delta: f64) -> Result<(usize, usize), Error> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
        });
    }
    let w = (E / epsilon - DIM_SLACK).ceil().max(1.0) as usize;
    let d = (-delta.ln() - DIM_SLACK).ceil().max(1.0) as usize;
    Ok((w, d))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CmsMode {
    Conservative,
    Plain,
    Nitro { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmsConfig {
    pub width: usize,
    pub depth: usize,
    pub mode: CmsMode,
}

impl CmsConfig {
    pub fn from_error_bounds(epsilon: f64, delta: f64, mode: CmsMode) -> Result<Self, Error> {
        let (width, depth) = cms_dims(epsilon, delta)?;
        CmsConfig::with_dims(width, depth, mode)
    }

    pub fn with_dims(width: usize, depth: usize, mode: CmsMode) -> Result<Self, Error> {
        if width == 0 || depth == 0 {
            return Err(Error::InvalidConfig(format!(
                "count-min dimensions must be positive, got w={width} d={depth}"
            )));
        }
        if let CmsMode::Nitro { p } = mode {
            check_probability(p)?;
        }
        Ok(CmsConfig { width, depth, mode })
    }
}

#[derive(Clone, Debug)]
pub struct CountMinSketch {
    config: CmsConfig,
    // row-major, depth × width
    counters: Vec<u64>,
    row_seeds: Vec<Seed>,
    sampler: Option<SkipSampler>,
    scratch: Vec<usize>,
}

impl CountMinSketch {
    pub fn new(config: CmsConfig, seed: Seed) -> Result<Self, Error> {
        let sampler = match config.mode {
            CmsMode::Nitro { p } => Some(SkipSampler::new(p, seed.derive(u64::MAX))?),
            _ => None,
        };
        Ok(CountMinSketch {
            config,
            counters: vec![0; config.width * config.depth],
            row_seeds: (0..config.depth as u64).map(|i| seed.derive(i)).collect(),
            sampler,
            scratch: Vec::with_capacity(config.depth),
        })
    }

    pub fn config(&self) -> &CmsConfig {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn depth(&self) -> usize {
        self.config.depth
    }

    /// Flat index of the counter `key` maps to in `row`.
    #[inline]
    fn slot(&self, row: usize, key: &FlowKey) -> usize {
        let col = (key.hash_with(self.row_seeds[row]) % self.config.width as u64) as usize;
        row * self.config.width + col
    }

    pub fn column(&self, row: usize, key: &FlowKey) -> usize {
        self.slot(row, key) - row * self.config.width
    }

    pub fn counter(&self, row: usize, col: usize) -> u64 {
        self.counters[row * self.config.width + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        let w = self.config.width;
        &self.counters[row * w..(row + 1) * w]
    }

    /// Minimum over the raw (unscaled) mapped counters.
    pub fn raw_min(&self, key: &FlowKey) -> u64 {
        (0..self.config.depth)
            .map(|r| self.counters[self.slot(r, key)])
            .min()
            .unwrap_or(0)
    }

    fn record_plain(&mut self, key: &FlowKey) {
        for row in 0..self.config.depth {
            let i = self.slot(row, key);
            self.counters[i] += 1;
        }
    }

    fn record_conservative(&mut self, key: &FlowKey) {
        let mut slots = std::mem::take(&mut self.scratch);
        slots.clear();
        slots.extend((0..self.config.depth).map(|r| self.slot(r, key)));
        let min = slots.iter().map(|&i| self.counters[i]).min().unwrap_or(0);
        for &i in &slots {
            if self.counters[i] == min {
                self.counters[i] += 1;
            }
        }
        self.scratch = slots;
    }

    fn record_sampled(&mut self, key: &FlowKey) {
        let depth = self.config.depth;
        let mut row = 0;
        while row < depth {
            let sampler = self.sampler.as_mut().expect("nitro mode carries a sampler");
            match sampler.next_within((depth - row) as u64) {
                Some(offset) => {
                    row += offset as usize;
                    let i = self.slot(row, key);
                    self.counters[i] += 1;
                    row += 1;
                }
                None => break,
            }
        }
    }
}

impl FrequencyEstimator for CountMinSketch {
    #[inline]
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        match self.config.mode {
            CmsMode::Plain => self.record_plain(key),
            CmsMode::Conservative => self.record_conservative(key),
            CmsMode::Nitro { .. } => self.record_sampled(key),
        }
        Ok(())
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        let raw = self.raw_min(key);
        match self.config.mode {
            // 1/p > 0, so the min of scaled counters is the scaled min
            CmsMode::Nitro { p } => scale_estimate(raw, p),
            _ => Estimate::from_count(raw),
        }
    }

    fn memory_bytes(&self) -> usize {
        self.config.width * self.config.depth * COUNTER_BYTES
    }

    fn stored_items(&self) -> Option<usize> {
        None
    }
}
