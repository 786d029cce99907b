//! Measurement protocols.
//!
//! Throughput (always single-threaded, one run after another):
//! - write-only: time one `record` per trace item;
//! - write-read: time `record` followed by `estimate` of the same item;
//! - read-only: record the whole trace untimed, then time one `estimate` per item.
//!
//! Accuracy and memory are measured in separate runs with no timing; their
//! runs are independent and fan out through [`map_runs`].
//!
//! Run `r` always uses estimator seed `base_seed + r`.

use std::hint::black_box;
use std::time::{Duration, Instant};

use flowsketch::metrics::{self, ErrorReport, Protocol};
use flowsketch::{FlowKey, FrequencyEstimator, Seed, Trace};

use crate::algorithm::{Algorithm, AnyEstimator, EstimatorParams};
use crate::report::Row;
use crate::runs::{map_runs, map_sequential};
use crate::{with_estimator, BenchError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThroughputProtocol {
    WriteOnly,
    WriteRead,
    ReadOnly,
}

impl ThroughputProtocol {
    pub const ALL: [ThroughputProtocol; 3] = [
        ThroughputProtocol::WriteOnly,
        ThroughputProtocol::WriteRead,
        ThroughputProtocol::ReadOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThroughputProtocol::WriteOnly => "write_only",
            ThroughputProtocol::WriteRead => "write_read",
            ThroughputProtocol::ReadOnly => "read_only",
        }
    }
}

/// How many runs to do and how to seed them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunPlan {
    pub runs: u32,
    pub base_seed: u64,
    /// One discarded pass before the first timed run.
    pub warmup: bool,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            runs: 13,
            base_seed: 0,
            warmup: true,
        }
    }
}

impl RunPlan {
    pub fn seed(&self, run: u32) -> Seed {
        Seed(self.base_seed.wrapping_add(run as u64))
    }

    fn check(&self) -> Result<(), BenchError> {
        if self.runs == 0 {
            Err(BenchError::NoRuns)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThroughputRun {
    /// Trace items processed per second.
    pub ops_per_sec: f64,
    pub elapsed: Duration,
    /// Items the estimator refused (cuckoo table full).
    pub dropped: u64,
}

fn time_pass<E: FrequencyEstimator>(
    protocol: ThroughputProtocol,
    est: &mut E,
    items: &[FlowKey],
) -> (Duration, u64) {
    let mut dropped = 0u64;
    match protocol {
        ThroughputProtocol::WriteOnly => {
            let start = Instant::now();
            for k in items {
                if est.record(k).is_err() {
                    dropped += 1;
                }
            }
            (start.elapsed(), dropped)
        }
        ThroughputProtocol::WriteRead => {
            let start = Instant::now();
            for k in items {
                if est.record(k).is_err() {
                    dropped += 1;
                }
                black_box(est.estimate(k));
            }
            (start.elapsed(), dropped)
        }
        ThroughputProtocol::ReadOnly => {
            for k in items {
                if est.record(k).is_err() {
                    dropped += 1;
                }
            }
            let start = Instant::now();
            for k in items {
                black_box(est.estimate(k));
            }
            (start.elapsed(), dropped)
        }
    }
}

fn throughput_run(
    protocol: ThroughputProtocol,
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    seed: Seed,
) -> Result<ThroughputRun, BenchError> {
    let items = trace.items();
    let mut est = AnyEstimator::build(algorithm, params, seed, items.len())?;
    let (elapsed, dropped) = with_estimator!(&mut est, e => time_pass(protocol, e, items));
    Ok(ThroughputRun {
        ops_per_sec: items.len() as f64 / elapsed.as_secs_f64().max(1e-12),
        elapsed,
        dropped,
    })
}

/// Runs `plan.runs` timed repetitions of one throughput protocol.
pub fn bench_throughput(
    protocol: ThroughputProtocol,
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<ThroughputRun>, BenchError> {
    plan.check()?;
    if plan.warmup {
        throughput_run(protocol, algorithm, params, trace, plan.seed(0))?;
    }
    map_sequential(plan.runs, |r| {
        throughput_run(protocol, algorithm, params, trace, plan.seed(r))
    })
    .into_iter()
    .collect()
}

pub fn bench_write_only(
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<ThroughputRun>, BenchError> {
    bench_throughput(ThroughputProtocol::WriteOnly, algorithm, params, trace, plan)
}

pub fn bench_write_read(
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<ThroughputRun>, BenchError> {
    bench_throughput(ThroughputProtocol::WriteRead, algorithm, params, trace, plan)
}

pub fn bench_read_only(
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<ThroughputRun>, BenchError> {
    bench_throughput(ThroughputProtocol::ReadOnly, algorithm, params, trace, plan)
}

/// Error reports of the three protocols, each measured on a fresh estimator.
pub fn accuracy_run(
    algorithm: Algorithm,
    params: &EstimatorParams,
    items: &[FlowKey],
    seed: Seed,
) -> Result<[ErrorReport; 3], BenchError> {
    let make = || AnyEstimator::build(algorithm, params, seed, items.len());
    Ok([
        metrics::run_on_arrival(items, &mut make()?)?,
        metrics::run_per_flow(items, &mut make()?)?,
        metrics::run_postmortem(items, &mut make()?)?,
    ])
}

pub fn bench_accuracy(
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<[ErrorReport; 3]>, BenchError> {
    plan.check()?;
    map_runs(plan.runs, |r| accuracy_run(algorithm, params, trace.items(), plan.seed(r)))
        .into_iter()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryRun {
    pub memory_bytes: usize,
    pub stored_items: Option<usize>,
    pub stored_bytes: Option<usize>,
    pub dropped: u64,
}

pub fn memory_run(
    algorithm: Algorithm,
    params: &EstimatorParams,
    items: &[FlowKey],
    seed: Seed,
) -> Result<MemoryRun, BenchError> {
    let mut est = AnyEstimator::build(algorithm, params, seed, items.len())?;
    let dropped = items.iter().filter(|k| est.record(k).is_err()).count() as u64;
    Ok(MemoryRun {
        memory_bytes: est.memory_bytes(),
        stored_items: est.stored_items(),
        stored_bytes: est.stored_bytes(),
        dropped,
    })
}

pub fn bench_memory(
    algorithm: Algorithm,
    params: &EstimatorParams,
    trace: &Trace,
    plan: &RunPlan,
) -> Result<Vec<MemoryRun>, BenchError> {
    plan.check()?;
    map_runs(plan.runs, |r| memory_run(algorithm, params, trace.items(), plan.seed(r)))
        .into_iter()
        .collect()
}

// ---- rows

pub fn throughput_rows(
    algorithm: Algorithm,
    protocol: ThroughputProtocol,
    trace: &Trace,
    runs: &[ThroughputRun],
) -> Result<Vec<Row>, BenchError> {
    let ops: Vec<f64> = runs.iter().map(|r| r.ops_per_sec).collect();
    let dropped: Vec<f64> = runs.iter().map(|r| r.dropped as f64).collect();
    let name = protocol.name();
    Ok(vec![
        Row::aggregate(algorithm, trace.name(), name, "throughput", "ops/s", &ops)?,
        Row::aggregate(algorithm, trace.name(), name, "dropped", "items", &dropped)?,
        trace_length_row(algorithm, trace, name, runs.len())?,
    ])
}

pub fn accuracy_rows(
    algorithm: Algorithm,
    trace: &Trace,
    runs: &[[ErrorReport; 3]],
) -> Result<Vec<Row>, BenchError> {
    let mut rows = Vec::new();
    for (i, protocol) in Protocol::ALL.into_iter().enumerate() {
        let per_run: Vec<_> = runs.iter().map(|r| r[i].metrics()).collect();
        for m in 0..4 {
            let values: Vec<f64> = per_run.iter().map(|ms| ms[m].1).collect();
            let metric = &per_run[0][m].0;
            rows.push(Row::aggregate(
                algorithm,
                trace.name(),
                "accuracy",
                metric,
                "occurrences",
                &values,
            )?);
        }
        let dropped: Vec<f64> = runs.iter().map(|r| r[i].dropped as f64).collect();
        rows.push(Row::aggregate(
            algorithm,
            trace.name(),
            "accuracy",
            &format!("{}_dropped", protocol.tag()),
            "items",
            &dropped,
        )?);
    }
    rows.push(trace_length_row(algorithm, trace, "accuracy", runs.len())?);
    Ok(rows)
}

/// Memory rows; `stored_items` and `stored_bytes` are omitted for fixed-size structures.
pub fn memory_rows(algorithm: Algorithm, trace: &Trace, runs: &[MemoryRun]) -> Result<Vec<Row>, BenchError> {
    let name = trace.name();
    let col = |f: fn(&MemoryRun) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let mut rows = vec![
        Row::aggregate(algorithm, name, "memory", "memory_bytes", "bytes", &col(|r| r.memory_bytes as f64))?,
        Row::aggregate(algorithm, name, "memory", "dropped", "items", &col(|r| r.dropped as f64))?,
        trace_length_row(algorithm, trace, "memory", runs.len())?,
    ];
    if runs.iter().all(|r| r.stored_items.is_some()) {
        rows.push(Row::aggregate(
            algorithm,
            name,
            "memory",
            "stored_items",
            "items",
            &col(|r| r.stored_items.unwrap_or(0) as f64),
        )?);
        rows.push(Row::aggregate(
            algorithm,
            name,
            "memory",
            "stored_bytes",
            "bytes",
            &col(|r| r.stored_bytes.unwrap_or(0) as f64),
        )?);
    }
    Ok(rows)
}

fn trace_length_row(algorithm: Algorithm, trace: &Trace, protocol: &str, runs: usize) -> Result<Row, BenchError> {
    Row::aggregate(
        algorithm,
        trace.name(),
        protocol,
        "trace_items",
        "items",
        &vec![trace.len() as f64; runs],
    )
}
