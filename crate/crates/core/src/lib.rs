//! Streaming frequency estimation for network flows.
//!
//! Every estimator implements [`FrequencyEstimator`]:
//!
//! | type | variants |
//! |------|----------|
//! | [`HashEstimator`] | exact hash table, NitroHash |
//! | [`CountMinSketch`] | conservative update, plain increment, NitroCMS |
//! | [`CuckooFilter`] | counting Cuckoo filter, NitroCuckoo, NC-SMALL sizing |
//! | [`SpaceSaving`] | Space Saving, Space Saving with random admission (RAP) |
//!
//! The Nitro variants process each potential update with probability `p`
//! through a [`SkipSampler`] and scale answers by `1/p`. All randomness flows
//! from explicit [`Seed`]s, so runs are reproducible.
//!
//! ```
//! use flowsketch::{CmsConfig, CmsMode, CountMinSketch, FlowKey, FrequencyEstimator, Seed};
//!
//! let config = CmsConfig::from_error_bounds(0.01, 0.01, CmsMode::Conservative).unwrap();
//! let mut cms = CountMinSketch::new(config, Seed(7)).unwrap();
//! let flow = FlowKey::try_from("10.0.0.1:443").unwrap();
//! for _ in 0..3 {
//!     cms.record(&flow).unwrap();
//! }
//! assert!(cms.estimate(&flow).value() >= 3.0);
//! ```

pub mod cms;
pub mod cuckoo;
mod error;
pub mod estimator;
pub mod exact_hash;
mod key;
pub mod metrics;
pub mod sampling;
pub mod space_saving;
pub mod trace;

pub use cms::{cms_dims, CmsConfig, CmsMode, CountMinSketch};
pub use cuckoo::{CuckooConfig, CuckooFilter, CuckooMode, IndexPair};
pub use error::{Error, TableFull};
pub use estimator::FrequencyEstimator;
pub use exact_hash::HashEstimator;
pub use key::{Estimate, FlowKey, Seed};
pub use metrics::{ErrorReport, GroundTruth, Protocol};
pub use sampling::{scale_estimate, SkipSampler};
pub use space_saving::{SpaceSaving, SpaceSavingMode};
pub use trace::{Trace, TraceStats, ZipfSpec};
