use std::fmt;
use std::str::FromStr;

use flowsketch::{
    CmsConfig, CmsMode, CountMinSketch, CuckooConfig, CuckooFilter, Estimate, FlowKey,
    FrequencyEstimator, HashEstimator, Seed, SpaceSaving, SpaceSavingMode, TableFull,
};

use crate::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Hash,
    NitroHash,
    Cms,
    CmsNomi,
    NitroCms,
    Cuckoo,
    NitroCuckoo,
    NcSmall,
    SpaceSaving,
    SpaceSavingRap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::Hash,
        Algorithm::NitroHash,
        Algorithm::Cms,
        Algorithm::CmsNomi,
        Algorithm::NitroCms,
        Algorithm::Cuckoo,
        Algorithm::NitroCuckoo,
        Algorithm::NcSmall,
        Algorithm::SpaceSaving,
        Algorithm::SpaceSavingRap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hash => "hash",
            Algorithm::NitroHash => "nitrohash",
            Algorithm::Cms => "cms",
            Algorithm::CmsNomi => "cms_nomi",
            Algorithm::NitroCms => "nitrocms",
            Algorithm::Cuckoo => "cuckoo",
            Algorithm::NitroCuckoo => "nitrocuckoo",
            Algorithm::NcSmall => "nc_small",
            Algorithm::SpaceSaving => "spacesaving",
            Algorithm::SpaceSavingRap => "spacesaving_rap",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::UnknownAlgorithm(s.to_string()))
    }
}

/// Knobs shared by every algorithm; each uses the ones that apply to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorParams {
    /// Sampling probability of the Nitro variants.
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Cuckoo slots; defaults to one per trace item.
    pub capacity: Option<usize>,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            p: 0.01,
            epsilon: 0.01,
            delta: 0.01,
            capacity: None,
        }
    }
}

/// A constructed estimator. The enum lets timed loops monomorphize per family.
#[derive(Clone, Debug)]
pub enum AnyEstimator {
    Hash(HashEstimator),
    Cms(CountMinSketch),
    Cuckoo(CuckooFilter),
    SpaceSaving(SpaceSaving),
}

/// Calls `$body` with `$e` bound to the concrete estimator inside `$any`.
#[macro_export]
macro_rules! with_estimator {
    ($any:expr, $e:ident => $body:expr) => {
        match $any {
            $crate::AnyEstimator::Hash($e) => $body,
            $crate::AnyEstimator::Cms($e) => $body,
            $crate::AnyEstimator::Cuckoo($e) => $body,
            $crate::AnyEstimator::SpaceSaving($e) => $body,
        }
    };
}

impl AnyEstimator {
    pub fn build(
        algorithm: Algorithm,
        params: &EstimatorParams,
        seed: Seed,
        trace_len: usize,
    ) -> Result<Self, BenchError> {
        let capacity = params.capacity.unwrap_or(trace_len);
        let cms = |mode| -> Result<AnyEstimator, BenchError> {
            let config = CmsConfig::from_error_bounds(params.epsilon, params.delta, mode)?;
            Ok(AnyEstimator::Cms(CountMinSketch::new(config, seed)?))
        };
        let cuckoo = |config| -> Result<AnyEstimator, BenchError> {
            Ok(AnyEstimator::Cuckoo(CuckooFilter::new(config, seed)?))
        };
        let ss = |mode| -> Result<AnyEstimator, BenchError> {
            Ok(AnyEstimator::SpaceSaving(SpaceSaving::with_epsilon(
                params.epsilon,
                mode,
                seed,
            )?))
        };
        match algorithm {
            Algorithm::Hash => Ok(AnyEstimator::Hash(HashEstimator::exact(seed))),
            Algorithm::NitroHash => Ok(AnyEstimator::Hash(HashEstimator::nitro(params.p, seed)?)),
            Algorithm::Cms => cms(CmsMode::Conservative),
            Algorithm::CmsNomi => cms(CmsMode::Plain),
            Algorithm::NitroCms => cms(CmsMode::Nitro { p: params.p }),
            Algorithm::Cuckoo => cuckoo(CuckooConfig::new(capacity)),
            Algorithm::NitroCuckoo => cuckoo(CuckooConfig::nitro(capacity, params.p)),
            Algorithm::NcSmall => cuckoo(CuckooConfig::nc_small(capacity, params.p)),
            Algorithm::SpaceSaving => ss(SpaceSavingMode::Plain),
            Algorithm::SpaceSavingRap => ss(SpaceSavingMode::Rap),
        }
    }
}

impl FrequencyEstimator for AnyEstimator {
    fn record(&mut self, key: &FlowKey) -> Result<(), TableFull> {
        with_estimator!(self, e => e.record(key))
    }

    fn estimate(&self, key: &FlowKey) -> Estimate {
        with_estimator!(self, e => e.estimate(key))
    }

    fn memory_bytes(&self) -> usize {
        with_estimator!(self, e => e.memory_bytes())
    }

    fn stored_items(&self) -> Option<usize> {
        with_estimator!(self, e => e.stored_items())
    }

    fn stored_bytes(&self) -> Option<usize> {
        with_estimator!(self, e => e.stored_bytes())
    }
}
