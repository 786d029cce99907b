//! Flow identifiers, point estimates and seeds shared by every estimator.

use std::fmt;

use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::Error;

/// Opaque identifier of a flow. Two keys denote the same flow iff their bytes are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowKey(Box<[u8]>);

impl FlowKey {
    /// Builds a key from raw bytes. Empty keys are rejected.
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, Error> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(Error::EmptyKey);
        }
        Ok(FlowKey(bytes.into_boxed_slice()))
    }

    /// Key whose bytes are the decimal rendering of `id`.
    pub fn from_u64(id: u64) -> Self {
        FlowKey(id.to_string().into_bytes().into_boxed_slice())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Seeded 64-bit hash of the key bytes.
    #[inline]
    pub fn hash_with(&self, seed: Seed) -> u64 {
        xxh3_64_with_seed(&self.0, seed.0)
    }
}

impl fmt::Debug for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlowKey({:?})", String::from_utf8_lossy(&self.0))
    }
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

impl TryFrom<&str> for FlowKey {
    type Error = Error;

    fn try_from(s: &str) -> Result<Self, Error> {
        FlowKey::new(s.as_bytes())
    }
}

/// Point estimate of a flow's frequency, in occurrences. Never negative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Estimate(f64);

impl Estimate {
    pub const ZERO: Estimate = Estimate(0.0);

    /// Panics on negative or NaN input.
    pub fn new(value: f64) -> Self {
        assert!(value >= 0.0, "estimate must be non-negative, got {value}");
        Estimate(value)
    }

    pub fn from_count(count: u64) -> Self {
        Estimate(count as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Explicit source of all randomness: hash seeds, samplers, coin flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives an independent sub-seed for a numbered stream (row hash, sampler, ...).
    pub fn derive(self, stream: u64) -> Seed {
        // splitmix64 finalizer over (seed, stream)
        let mut z = self
            .0
            .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
