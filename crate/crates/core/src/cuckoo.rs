//! Counting Cuckoo filter.
//!
//! Each bucket holds `b` slots of `(fingerprint, counter)`. A key may live in
//! bucket `i1 = h(key)` or `i2 = i1 XOR h(fingerprint)`; the XOR makes the
//! relation symmetric, so an entry can be relocated knowing only its
//! fingerprint. The bucket count is a power of two, which keeps the XOR exact
//! under masking.
//!
//! Two keys alias when they share both fingerprint and bucket pair; they then
//! share a counter, which is the only source of overestimation.

use rand::Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, TableFull};
use crate::estimator::{FrequencyEstimator, COUNTER_BYTES, FINGERPRINT_BYTES};
use crate::key::{Estimate, FlowKey, Seed};
use crate::sampling::{check_probability, rng_from_seed, scale_estimate, SkipSampler};

pub const DEFAULT_SLOTS_PER_BUCKET: usize = 4;
pub const DEFAULT_FINGERPRINT_BITS: u32 = 64;
pub const DEFAULT_MAX_KICKS: u32 = 500;

const ENTRY_BYTES: usize = FINGERPRINT_BYTES + COUNTER_BYTES;
const EMPTY: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CuckooMode {
    Plain,
    Nitro { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuckooConfig {
    /// Requested slot count before scaling and power-of-two rounding.
    pub capacity_slots: usize,
    pub slots_per_bucket: usize,
    pub fingerprint_bits: u32,
    pub max_kicks: u32,
    pub mode: CuckooMode,
    /// Multiply `capacity_slots` by the sampling probability (NC-SMALL sizing).
    pub scale_capacity_by_p: bool,
}

impl CuckooConfig {
    pub fn new(capacity_slots: usize) -> Self {
        CuckooConfig {
            capacity_slots,
            slots_per_bucket: DEFAULT_SLOTS_PER_BUCKET,
            fingerprint_bits: DEFAULT_FINGERPRINT_BITS,
            max_kicks: DEFAULT_MAX_KICKS,
            mode: CuckooMode::Plain,
            scale_capacity_by_p: false,
        }
    }

    pub fn nitro(capacity_slots: usize, p: f64) -> Self {
        CuckooConfig {
            mode: CuckooMode::Nitro { p },
            ..CuckooConfig::new(capacity_slots)
        }
    }

    /// NitroCuckoo with its table shrunk by a factor of `p`.
    pub fn nc_small(capacity_slots: usize, p: f64) -> Self {
        CuckooConfig {
            scale_capacity_by_p: true,
            ..CuckooConfig::nitro(capacity_slots, p)
        }
    }

    pub fn with_slots_per_bucket(mut self, b: usize) -> Self {
        self.slots_per_bucket = b;
        self
    }

    pub fn with_fingerprint_bits(mut self, bits: u32) -> Self {
        self.fingerprint_bits = bits;
        self
    }

    pub fn with_max_kicks(mut self, kicks: u32) -> Self {
        self.max_kicks = kicks;
        self
    }

    fn validate(&self) -> Result<(), Error> {
        if self.capacity_slots == 0 {
            return Err(Error::InvalidConfig("cuckoo capacity must be positive".into()));
        }
        if self.slots_per_bucket == 0 {
            return Err(Error::InvalidConfig("slots per bucket must be positive".into()));
        }
        if !(1..=64).contains(&self.fingerprint_bits) {
            return Err(Error::InvalidConfig(format!(
                "fingerprint bits must be in 1..=64, got {}",
                self.fingerprint_bits
            )));
        }
        if self.max_kicks == 0 {
            return Err(Error::InvalidConfig("max kicks must be positive".into()));
        }
        if let CuckooMode::Nitro { p } = self.mode {
            check_probability(p)?;
        }
        Ok(())
    }

    /// Slots after optional `p` scaling, before bucket rounding.
    pub fn effective_capacity(&self) -> usize {
        match (self.mode, self.scale_capacity_by_p) {
            (CuckooMode::Nitro { p }, true) => ((self.capacity_slots as f64 * p).ceil() as usize).max(1),
            _ => self.capacity_slots,
        }
    }

    /// `ceil(capacity / b)` rounded up to a power of two.
    pub fn bucket_count(&self) -> usize {
        self.effective_capacity()
            .div_ceil(self.slots_per_bucket)
            .max(1)
            .next_power_of_two()
    }
}

/// Candidate buckets and fingerprint of a key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexPair {
    pub i1: usize,
    pub i2: usize,
    pub fingerprint: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Slot {
    fingerprint: u64,
    count: u64,
}

#[derive(Clone, Debug)]
pub struct CuckooFilter {
    config: CuckooConfig,
    slots: Vec<Slot>,
    bucket_mask: u64,
    fingerprint_mask: u64,
    index_seed: Seed,
    fingerprint_seed: Seed,
    rng: Xoshiro256PlusPlus,
    sampler: Option<SkipSampler>,
    occupied: usize,
    kick_path: Vec<usize>,
}

impl CuckooFilter {
    pub fn new(config: CuckooConfig, seed: Seed) -> Result<Self, Error> {
        config.validate()?;
        let buckets = config.bucket_count();
        let sampler = match config.mode {
            CuckooMode::Nitro { p } => Some(SkipSampler::new(p, seed.derive(3))?),
            CuckooMode::Plain => None,
        };
        let fingerprint_mask = if config.fingerprint_bits == 64 {
            u64::MAX
        } else {
            (1u64 << config.fingerprint_bits) - 1
        };
        Ok(CuckooFilter {
            config,
            slots: vec![Slot::default(); buckets * config.slots_per_bucket],
            bucket_mask: buckets as u64 - 1,
            fingerprint_mask,
            index_seed: seed.derive(0),
            fingerprint_seed: seed.derive(1),
            rng: rng_from_seed(seed.derive(2)),
            sampler,
            occupied: 0,
            kick_path: Vec::new(),
        })
    }

    pub fn config(&self) -> &CuckooConfig {
        &self.config
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_mask as usize + 1
    }

    pub fn total_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn load_factor(&self) -> f64 {
        self.occupied as f64 / self.slots.len() as f64
    }

    /// Sum of all counters.
    pub fn total_count(&self) -> u64 {
        self.slots.iter().map(|s| s.count).sum()
    }

    #[inline]
    fn fingerprint_hash(&self, fingerprint: u64) -> u64 {
        xxh3_64_with_seed(&fingerprint.to_le_bytes(), self.index_seed.0)
    }

    /// The other bucket an entry with `fingerprint` may occupy.
    #[inline]
    pub fn alt_index(&self, bucket: usize, fingerprint: u64) -> usize {
        ((bucket as u64 ^ self.fingerprint_hash(fingerprint)) & self.bucket_mask) as usize
    }

    #[inline]
    pub fn index_pair(&self, key: &FlowKey) -> IndexPair {
        let mut fingerprint = key.hash_with(self.fingerprint_seed) & self.fingerprint_mask;
        if fingerprint == EMPTY {
            fingerprint = 1;
        }
        let i1 = (key.hash_with(self.index_seed) & self.bucket_mask) as usize;
        IndexPair {
            i1,
            i2: self.alt_index(i1, fingerprint),
            fingerprint,
        }
    }

    #[inline]
    fn bucket(&self, i: usize) -> std::ops::Range<usize> {
        let b = self.config.slots_per_bucket;
        i * b..(i + 1) * b
    }

    #[inline]
    fn find(&self, bucket: usize, fingerprint: u64) -> Option<usize> {
        self.bucket(bucket)
            .find(|&s| self.slots[s].fingerprint == fingerprint)
    }

    #[inline]
    fn free_slot(&self, bucket: usize) -> Option<usize> {
        self.find(bucket, EMPTY)
    }

    /// Raw (unscaled) counter for `key`, 0 if absent.
    pub fn raw_count(&self, key: &FlowKey) -> u64 {
        let IndexPair { i1, i2, fingerprint } = self.index_pair(key);
        self.find(i1, fingerprint)
            .or_else(|| self.find(i2, fingerprint))
            .map_or(0, |s| self.slots[s].count)
    }

    fn insert_counted(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        let IndexPair { i1, i2, fingerprint } = self.index_pair(key);
        if let Some(s) = self.find(i1, fingerprint).or_else(|| self.find(i2, fingerprint)) {
            self.slots[s].count += 1;
            return Ok(());
        }
        let mut carried = Slot {
            fingerprint,
            count: 1,
        };
        if let Some(s) = self.free_slot(i1).or_else(|| self.free_slot(i2)) {
            self.slots[s] = carried;
            self.occupied += 1;
            return Ok(());
        }

        let mut path = std::mem::take(&mut self.kick_path);
        path.clear();
        let mut bucket = i2;
        let mut placed = false;
        for _ in 0..self.config.max_kicks {
            let victim = bucket * self.config.slots_per_bucket
                + self.rng.random_range(0..self.config.slots_per_bucket);
            std::mem::swap(&mut carried, &mut self.slots[victim]);
            path.push(victim);
            bucket = self.alt_index(bucket, carried.fingerprint);
            if let Some(s) = self.free_slot(bucket) {
                self.slots[s] = carried;
                self.occupied += 1;
                placed = true;
                break;
            }
        }
        let kicks = path.len() as u32;
        if !placed {
            // unwind the eviction chain so the table is exactly as before
            for &victim in path.iter().rev() {
                std::mem::swap(&mut carried, &mut self.slots[victim]);
            }
            debug_assert_eq!(carried.fingerprint, fingerprint);
        }
        self.kick_path = path;
        if placed {
            Ok(())
        } else {
            Err(TableFull { kicks })
        }
    }
}

impl FrequencyEstimator for CuckooFilter {
    #[inline]
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        if let Some(sampler) = &mut self.sampler {
            if !sampler.should_process() {
                return Ok(());
            }
        }
        self.insert_counted(key)
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        let raw = self.raw_count(key);
        match self.config.mode {
            CuckooMode::Nitro { p } => scale_estimate(raw, p),
            CuckooMode::Plain => Estimate::from_count(raw),
        }
    }

    fn memory_bytes(&self) -> usize {
        self.slots.len() * ENTRY_BYTES
    }

    fn stored_items(&self) -> Option<usize> {
        Some(self.occupied)
    }

    fn stored_bytes(&self) -> Option<usize> {
        Some(self.occupied * ENTRY_BYTES)
    }
}
