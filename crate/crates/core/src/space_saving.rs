//! Space Saving over a fixed budget of `M` counters, with optional RAP
//! (random admission) for untracked arrivals.
//!
//! Entries live in an arena indexed by slot; a binary min-heap over slots,
//! ordered by `(count, stamp)`, gives the minimum in O(1) and counter
//! increases in O(log M). The stamp is the arrival index at which the entry
//! took its slot, so among equal minima the oldest occupant is evicted first.

use std::collections::HashMap;

use rand::Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use xxhash_rust::xxh3::Xxh3Builder;

use crate::error::{Error, TableFull};
use crate::estimator::{FrequencyEstimator, COUNTER_BYTES, IDENTIFIER_BYTES};
use crate::key::{Estimate, FlowKey, Seed};
use crate::sampling::rng_from_seed;

const ENTRY_BYTES: usize = IDENTIFIER_BYTES + COUNTER_BYTES;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceSavingMode {
    Plain,
    /// Untracked arrivals take the minimal entry only with probability `1 / (C_m + 1)`.
    Rap,
}

/// `ceil(1 / epsilon)`.
pub fn budget_for_epsilon(epsilon: f64) -> Result<usize, Error> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    Ok((1.0 / epsilon - 1e-9).ceil() as usize)
}

#[derive(Clone, Debug)]
pub struct SpaceSaving {
    budget: usize,
    mode: SpaceSavingMode,
    index: HashMap<FlowKey, usize, Xxh3Builder>,
    keys: Vec<FlowKey>,
    counts: Vec<u64>,
    stamps: Vec<u64>,
    // heap of slots, and each slot's position in it
    heap: Vec<usize>,
    position: Vec<usize>,
    rng: Xoshiro256PlusPlus,
    items_seen: u64,
    admission_draws: u64,
}

impl SpaceSaving {
    pub fn new(budget: usize, mode: SpaceSavingMode, seed: Seed) -> Result<Self, Error> {
        if budget == 0 {
            return Err(Error::InvalidConfig("space saving budget must be positive".into()));
        }
        Ok(SpaceSaving {
            budget,
            mode,
            index: HashMap::with_capacity_and_hasher(budget, Xxh3Builder::new().with_seed(seed.0)),
            keys: Vec::with_capacity(budget),
            counts: Vec::with_capacity(budget),
            stamps: Vec::with_capacity(budget),
            heap: Vec::with_capacity(budget),
            position: Vec::with_capacity(budget),
            rng: rng_from_seed(seed.derive(1)),
            items_seen: 0,
            admission_draws: 0,
        })
    }

    pub fn with_epsilon(epsilon: f64, mode: SpaceSavingMode, seed: Seed) -> Result<Self, Error> {
        SpaceSaving::new(budget_for_epsilon(epsilon)?, mode, seed)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn mode(&self) -> SpaceSavingMode {
        self.mode
    }

    /// Stream length so far, including rejected arrivals.
    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    /// PRNG draws spent on admission coin flips.
    pub fn admission_draws(&self) -> u64 {
        self.admission_draws
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Smallest tracked counter, 0 while empty.
    pub fn min_count(&self) -> u64 {
        self.heap.first().map_or(0, |&s| self.counts[s])
    }

    /// Counter of a tracked key.
    pub fn tracked_count(&self, key: &FlowKey) -> Option<u64> {
        self.index.get(key).map(|&s| self.counts[s])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FlowKey, u64)> {
        self.keys.iter().zip(self.counts.iter().copied())
    }

    #[inline]
    fn less(&self, a: usize, b: usize) -> bool {
        (self.counts[a], self.stamps[a]) < (self.counts[b], self.stamps[b])
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.position[self.heap[i]] = i;
        self.position[self.heap[j]] = j;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && self.less(self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !self.less(self.heap[child], self.heap[i]) {
                break;
            }
            self.swap(i, child);
            i = child;
        }
    }

    fn admit(&mut self, min_count: u64) -> bool {
        match self.mode {
            SpaceSavingMode::Plain => true,
            SpaceSavingMode::Rap => {
                self.admission_draws += 1;
                self.rng.random::<f64>() < 1.0 / (min_count as f64 + 1.0)
            }
        }
    }
}

impl FrequencyEstimator for SpaceSaving {
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        let stamp = self.items_seen;
        self.items_seen += 1;
        if let Some(&slot) = self.index.get(key) {
            self.counts[slot] += 1;
            self.sift_down(self.position[slot]);
            return Ok(());
        }
        if self.heap.len() < self.budget {
            let slot = self.keys.len();
            self.keys.push(key.clone());
            self.counts.push(1);
            self.stamps.push(stamp);
            self.position.push(self.heap.len());
            self.heap.push(slot);
            self.index.insert(key.clone(), slot);
            self.sift_up(self.heap.len() - 1);
            return Ok(());
        }
        let slot = self.heap[0];
        let min_count = self.counts[slot];
        if !self.admit(min_count) {
            return Ok(());
        }
        self.index.remove(&self.keys[slot]);
        self.index.insert(key.clone(), slot);
        self.keys[slot] = key.clone();
        self.counts[slot] = min_count + 1;
        self.stamps[slot] = stamp;
        self.sift_down(0);
        Ok(())
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        Estimate::from_count(self.tracked_count(key).unwrap_or_else(|| self.min_count()))
    }

    fn memory_bytes(&self) -> usize {
        self.budget * ENTRY_BYTES
    }

    fn stored_items(&self) -> Option<usize> {
        None
    }
}
