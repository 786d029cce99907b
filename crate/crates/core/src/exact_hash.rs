//! Hash-table counting: one exact counter per distinct flow, and its sampled
//! variant NitroHash, which touches the table for only a `p` fraction of the
//! stream and scales answers by `1/p`.

use std::collections::HashMap;

use xxhash_rust::xxh3::Xxh3Builder;

use crate::error::{Error, TableFull};
use crate::estimator::{FrequencyEstimator, COUNTER_BYTES, IDENTIFIER_BYTES};
use crate::key::{Estimate, FlowKey, Seed};
use crate::sampling::{scale_estimate, SkipSampler};

const ENTRY_BYTES: usize = IDENTIFIER_BYTES + COUNTER_BYTES;

#[derive(Clone, Debug)]
pub struct HashEstimator {
    // starts empty and doubles on demand
    table: HashMap<FlowKey, u64, Xxh3Builder>,
    sampler: Option<SkipSampler>,
    table_operations: u64,
}

impl HashEstimator {
    /// Exact counting.
    pub fn exact(seed: Seed) -> Self {
        HashEstimator {
            table: HashMap::with_hasher(Xxh3Builder::new().with_seed(seed.0)),
            sampler: None,
            table_operations: 0,
        }
    }

    /// NitroHash: each occurrence is counted with probability `p`.
    pub fn nitro(p: f64, seed: Seed) -> Result<Self, Error> {
        let sampler = SkipSampler::new(p, seed.derive(1))?;
        let mut est = HashEstimator::exact(seed);
        est.sampler = Some(sampler);
        Ok(est)
    }

    pub fn probability(&self) -> f64 {
        self.sampler.as_ref().map_or(1.0, SkipSampler::probability)
    }

    /// Raw stored count (sampled occurrences in nitro mode).
    pub fn raw_count(&self, key: &FlowKey) -> u64 {
        self.table.get(key).copied().unwrap_or(0)
    }

    /// Current table capacity in entries.
    pub fn capacity(&self) -> usize {
        self.table.capacity()
    }

    /// Number of times `record` hashed a key into the table.
    pub fn table_operations(&self) -> u64 {
        self.table_operations
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FlowKey, u64)> {
        self.table.iter().map(|(k, &c)| (k, c))
    }
}

impl FrequencyEstimator for HashEstimator {
    #[inline]
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        if let Some(sampler) = &mut self.sampler {
            if !sampler.should_process() {
                return Ok(());
            }
        }
        self.table_operations += 1;
        match self.table.get_mut(key) {
            Some(count) => *count += 1,
            None => {
                self.table.insert(key.clone(), 1);
            }
        }
        Ok(())
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        match (self.table.get(key), &self.sampler) {
            (None, _) => Estimate::ZERO,
            (Some(&c), None) => Estimate::from_count(c),
            (Some(&c), Some(s)) => scale_estimate(c, s.probability()),
        }
    }

    fn memory_bytes(&self) -> usize {
        self.table.capacity() * ENTRY_BYTES
    }

    fn stored_items(&self) -> Option<usize> {
        Some(self.table.len())
    }

    fn stored_bytes(&self) -> Option<usize> {
        Some(self.table.len() * ENTRY_BYTES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> FlowKey {
        FlowKey::try_from(s).unwrap()
    }

    #[test]
    fn counts_exactly() {
        let mut h = HashEstimator::exact(Seed(0));
        for k in ["a", "a", "b"] {
            h.record(&key(k)).unwrap();
        }
        assert_eq!(h.estimate(&key("a")).value(), 2.0);
        assert_eq!(h.estimate(&key("b")).value(), 1.0);
        assert_eq!(h.estimate(&key("never")).value(), 0.0);
        assert_eq!(h.stored_items(), Some(2));
        for _ in 0..5 {
            h.record(&key("x")).unwrap();
        }
        assert_eq!(h.estimate(&key("x")).value(), 5.0);
    }

    #[test]
    fn nitro_scales_stored_counts() {
        let mut h = HashEstimator::nitro(0.1, Seed(4)).unwrap();
        h.table.insert(key("f"), 3);
        assert!((h.estimate(&key("f")).value() - 30.0).abs() < 1e-9);
        assert_eq!(h.raw_count(&key("f")), 3);
    }

    #[test]
    fn nitro_at_probability_one_is_exact() {
        let mut exact = HashEstimator::exact(Seed(2));
        let mut nitro = HashEstimator::nitro(1.0, Seed(2)).unwrap();
        for i in 0..5000u64 {
            let k = FlowKey::from_u64(i * i % 97);
            exact.record(&k).unwrap();
            nitro.record(&k).unwrap();
        }
        for i in 0..97 {
            let k = FlowKey::from_u64(i);
            assert_eq!(exact.estimate(&k), nitro.estimate(&k));
        }
    }

    #[test]
    fn memory_tracks_capacity() {
        let mut h = HashEstimator::exact(Seed(0));
        assert_eq!(h.memory_bytes(), h.capacity() * 8);
        for i in 0..1000 {
            h.record(&FlowKey::from_u64(i)).unwrap();
        }
        assert!(h.capacity() >= 1000);
        assert_eq!(h.memory_bytes(), h.capacity() * 8);
        assert_eq!(h.stored_bytes(), Some(8000));
    }
}
