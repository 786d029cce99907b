use crate::error::TableFull;
use crate::key::{Estimate, FlowKey};

/// Accounting sizes used for memory reports, in bytes.
pub const COUNTER_BYTES: usize = 4;
pub const IDENTIFIER_BYTES: usize = 4;
pub const FINGERPRINT_BYTES: usize = 8;

/// The uniform interface every frequency estimator implements.
///
/// Implementations are single-threaded: they are `Send` so a harness can
/// move distinct instances to distinct threads, but never shared mutably.
pub trait FrequencyEstimator: Send {
    /// Processes one stream occurrence of `key`.
    ///
    /// Only cuckoo-based estimators can fail, when an insertion exhausts its
    /// eviction budget; the occurrence is then dropped.
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull>;

    /// Point estimate for `key`. Never mutates the estimator.
    fn estimate(&self, key: &FlowKey) -> Estimate;

    /// Capacity times per-entry size, using 4-byte counters, 4-byte
    /// identifiers and 8-byte fingerprints.
    fn memory_bytes(&self) -> usize;

    /// Distinct entries currently held, or `None` where the structure is
    /// fixed-size and the figure carries no information (CMS, Space Saving).
    fn stored_items(&self) -> Option<usize>;

    /// Bytes occupied by the stored items alone (items × entry size).
    fn stored_bytes(&self) -> Option<usize> {
        None
    }
}

impl<E: FrequencyEstimator + ?Sized> FrequencyEstimator for Box<E> {
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        (**self).record(key)
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        (**self).estimate(key)
    }

    fn memory_bytes(&self) -> usize {
        (**self).memory_bytes()
    }

    fn stored_items(&self) -> Option<usize> {
        (**self).stored_items()
    }

    fn stored_bytes(&self) -> Option<usize> {
        (**self).stored_bytes()
    }
}
