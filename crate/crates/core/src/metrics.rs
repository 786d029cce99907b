//! Exact ground truth and the error metrics of the three evaluation protocols.
//!
//! - On-arrival: after recording each item, query it; average over `N` items
//!   using the running true count (so `f >= 1`).
//! - Per-flow: record everything, then query each distinct flow once; average over `M` flows.
//! - Postmortem: record everything, then query once per stream occurrence; average over `N`.
//!
//! Each protocol reports MSRE exactly as its formula reads, the mean of
//! `sqrt((f - f̂)^2)`, which equals AVGERR; RMSE (`sqrt` of the mean squared
//! error) is reported alongside it.

use std::fmt;

use indexmap::IndexMap;
use xxhash_rust::xxh3::Xxh3Builder;

use crate::error::Error;
use crate::estimator::FrequencyEstimator;
use crate::key::FlowKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    OnArrival,
    PerFlow,
    Postmortem,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::OnArrival, Protocol::PerFlow, Protocol::Postmortem];

    /// Short prefix used in metric names.
    pub fn tag(self) -> &'static str {
        match self {
            Protocol::OnArrival => "oa",
            Protocol::PerFlow => "flow",
            Protocol::Postmortem => "pm",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::OnArrival => "on_arrival",
            Protocol::PerFlow => "per_flow",
            Protocol::Postmortem => "postmortem",
        })
    }
}

/// Exact flow counts, keyed in first-appearance order.
#[derive(Clone, Debug, Default)]
pub struct GroundTruth {
    counts: IndexMap<FlowKey, u64, Xxh3Builder>,
    total: u64,
}

impl GroundTruth {
    pub fn new() -> Self {
        GroundTruth::default()
    }

    pub fn from_stream(stream: &[FlowKey]) -> Self {
        let mut truth = GroundTruth::new();
        for key in stream {
            truth.record(key);
        }
        truth
    }

    /// Counts one occurrence and returns the key's updated frequency.
    pub fn record(&mut self, key: &FlowKey) -> u64 {
        self.total += 1;
        match self.counts.get_mut(key) {
            Some(c) => {
                *c += 1;
                *c
            }
            None => {
                self.counts.insert(key.clone(), 1);
                1
            }
        }
    }

    pub fn count(&self, key: &FlowKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Stream length `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Distinct flows `M`.
    pub fn uniques(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FlowKey, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub protocol: Protocol,
    pub msre_as_written: f64,
    pub avgerr: f64,
    pub avgrelerr: f64,
    pub rmse: f64,
    /// Number of queries averaged over.
    pub queries: u64,
    /// Occurrences the estimator refused (cuckoo table full).
    pub dropped: u64,
}

impl ErrorReport {
    /// `(metric name, value)` pairs, e.g. `("oa_avgerr", 0.5)`.
    pub fn metrics(&self) -> [(String, f64); 4] {
        let tag = self.protocol.tag();
        [
            (format!("{tag}_msre"), self.msre_as_written),
            (format!("{tag}_avgerr"), self.avgerr),
            (format!("{tag}_avgrelerr"), self.avgrelerr),
            (format!("{tag}_rmse"), self.rmse),
        ]
    }
}

#[derive(Default)]
struct ErrorSums {
    root_square: f64,
    abs: f64,
    rel: f64,
    square: f64,
    n: u64,
}

impl ErrorSums {
    #[inline]
    fn add(&mut self, truth: u64, estimate: f64) {
        let f = truth as f64;
        let diff = f - estimate;
        self.root_square += (diff * diff).sqrt();
        self.abs += diff.abs();
        self.rel += diff.abs() / f;
        self.square += diff * diff;
        self.n += 1;
    }

    fn finish(self, protocol: Protocol, dropped: u64) -> ErrorReport {
        let n = self.n as f64;
        ErrorReport {
            protocol,
            msre_as_written: self.root_square / n,
            avgerr: self.abs / n,
            avgrelerr: self.rel / n,
            rmse: (self.square / n).sqrt(),
            queries: self.n,
            dropped,
        }
    }
}

fn record_all<E: FrequencyEstimator + ?Sized>(stream: &[FlowKey], est: &mut E) -> u64 {
    stream.iter().filter(|k| est.record(k).is_err()).count() as u64
}

pub fn run_on_arrival<E: FrequencyEstimator + ?Sized>(
    stream: &[FlowKey],
    est: &mut E,
) -> Result<ErrorReport, Error> {
    if stream.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut truth = GroundTruth::new();
    let mut sums = ErrorSums::default();
    let mut dropped = 0;
    for key in stream {
        if est.record(key).is_err() {
            dropped += 1;
        }
        let f = truth.record(key);
        sums.add(f, est.estimate(key).value());
    }
    Ok(sums.finish(Protocol::OnArrival, dropped))
}

pub fn run_per_flow<E: FrequencyEstimator + ?Sized>(
    stream: &[FlowKey],
    est: &mut E,
) -> Result<ErrorReport, Error> {
    run_per_flow_where(stream, est, |_| true)
}

/// Per-flow protocol restricted to flows whose final true count satisfies `keep`.
///
/// Fails with [`Error::EmptyTrace`] if no flow qualifies.
pub fn run_per_flow_where<E: FrequencyEstimator + ?Sized>(
    stream: &[FlowKey],
    est: &mut E,
    keep: impl Fn(u64) -> bool,
) -> Result<ErrorReport, Error> {
    if stream.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dropped = record_all(stream, est);
    let truth = GroundTruth::from_stream(stream);
    let mut sums = ErrorSums::default();
    for (key, f) in truth.iter().filter(|&(_, f)| keep(f)) {
        sums.add(f, est.estimate(key).value());
    }
    if sums.n == 0 {
        return Err(Error::EmptyTrace);
    }
    Ok(sums.finish(Protocol::PerFlow, dropped))
}

pub fn run_postmortem<E: FrequencyEstimator + ?Sized>(
    stream: &[FlowKey],
    est: &mut E,
) -> Result<ErrorReport, Error> {
    if stream.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dropped = record_all(stream, est);
    let truth = GroundTruth::from_stream(stream);
    let mut sums = ErrorSums::default();
    for key in stream {
        sums.add(truth.count(key), est.estimate(key).value());
    }
    Ok(sums.finish(Protocol::Postmortem, dropped))
}

pub fn run_protocol<E: FrequencyEstimator + ?Sized>(
    protocol: Protocol,
    stream: &[FlowKey],
    est: &mut E,
) -> Result<ErrorReport, Error> {
    match protocol {
        Protocol::OnArrival => run_on_arrival(stream, est),
        Protocol::PerFlow => run_per_flow(stream, est),
        Protocol::Postmortem => run_postmortem(stream, est),
    }
}

/// All three protocols, each on a fresh estimator from `make`.
pub fn run_all<E, F>(stream: &[FlowKey], mut make: F) -> Result<[ErrorReport; 3], Error>
where
    E: FrequencyEstimator,
    F: FnMut() -> E,
{
    Ok([
        run_on_arrival(stream, &mut make())?,
        run_per_flow(stream, &mut make())?,
        run_postmortem(stream, &mut make())?,
    ])
}
