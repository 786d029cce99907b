//! End-to-end acceptance checks. Everything runs inside one test so the
//! throughput comparisons see an otherwise idle process and every criterion
//! reports a line even when an earlier one fails.
//!
//! Run with `cargo test -p flowsketch-bench --test acceptance -- --nocapture`.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use flowsketch::metrics::{self, GroundTruth, Protocol};
use flowsketch::{
    CmsConfig, CmsMode, CountMinSketch, CuckooConfig, CuckooFilter, Estimate, FlowKey,
    FrequencyEstimator, HashEstimator, Seed, SpaceSaving, SpaceSavingMode, TableFull, Trace,
    ZipfSpec,
};
use flowsketch_bench::harness::{self, RunPlan, ThroughputProtocol};
use flowsketch_bench::runs::map_runs;
use flowsketch_bench::{Algorithm, AnyEstimator, EstimatorParams};

const N: usize = 1_000_000;
const PREFIX: usize = 100_000;
/// Key-space size of every synthetic trace. With alpha = 1 the top key then
/// takes about 10^5 of 10^6 items.
const UNIVERSE: u64 = 10_000;
const P: f64 = 0.01;

fn zipf(n_items: usize, seed: u64) -> Trace {
    Trace::zipf(&ZipfSpec {
        n_items,
        universe: UNIVERSE,
        alpha: 1.0,
        seed: Seed(seed),
    })
    .unwrap()
}

struct Outcome {
    pass: bool,
    soft: bool,
    detail: String,
}

impl Outcome {
    fn hard(pass: bool, detail: String) -> Self {
        Outcome { pass, soft: false, detail }
    }
}

fn sketch(mode: CmsMode, seed: Seed) -> CountMinSketch {
    CountMinSketch::new(CmsConfig::from_error_bounds(0.01, 0.01, mode).unwrap(), seed).unwrap()
}

fn fill<E: FrequencyEstimator>(mut est: E, items: &[FlowKey]) -> E {
    for k in items {
        est.record(k).unwrap();
    }
    est
}

fn exactness(full: &Trace) -> Outcome {
    let start = Instant::now();
    let reports = metrics::run_all(full.items(), || HashEstimator::exact(Seed(0))).unwrap();
    let elapsed = start.elapsed();
    let nonzero: Vec<String> = reports
        .iter()
        .flat_map(|r| r.metrics())
        .filter(|(_, v)| *v != 0.0)
        .map(|(name, v)| format!("{name}={v}"))
        .collect();
    Outcome::hard(
        nonzero.is_empty() && elapsed.as_secs_f64() < 30.0,
        format!("nonzero metrics {nonzero:?}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn cms_one_sided(short: &Trace) -> Outcome {
    let truth = GroundTruth::from_stream(short.items());
    let mut violations = 0;
    for mode in [CmsMode::Conservative, CmsMode::Plain] {
        let cms = fill(sketch(mode, Seed(1)), short.items());
        violations += truth
            .iter()
            .filter(|(k, f)| cms.estimate(k).value() < *f as f64)
            .count();
    }
    Outcome::hard(violations == 0, format!("{violations} underestimates over {} flows x 2 modes", truth.uniques()))
}

fn cms_bound(short: &Trace) -> Outcome {
    let truth = GroundTruth::from_stream(short.items());
    let slack = 0.01 * short.len() as f64;
    let mut worst: f64 = 0.0;
    for mode in [CmsMode::Conservative, CmsMode::Plain] {
        let cms = fill(sketch(mode, Seed(1)), short.items());
        let over = truth
            .iter()
            .filter(|(k, f)| cms.estimate(k).value() - *f as f64 > slack)
            .count();
        worst = worst.max(over as f64 / truth.uniques() as f64);
    }
    Outcome::hard(worst <= 0.02, format!("worst fraction beyond eps*N = {worst:.5} (limit 0.02)"))
}

fn conservative_dominance(full: &Trace) -> Outcome {
    let truth = GroundTruth::from_stream(full.items());
    let cu = fill(sketch(CmsMode::Conservative, Seed(1)), full.items());
    let plain = fill(sketch(CmsMode::Plain, Seed(1)), full.items());
    let violations = truth
        .iter()
        .filter(|(k, _)| cu.estimate(k).value() > plain.estimate(k).value())
        .count();
    let mut ratios = Vec::new();
    for protocol in Protocol::ALL {
        let run = |mode| {
            let mut est = sketch(mode, Seed(1));
            metrics::run_protocol(protocol, full.items(), &mut est).unwrap().avgerr
        };
        ratios.push((protocol.tag(), run(CmsMode::Plain) / run(CmsMode::Conservative)));
    }
    let pass = violations == 0 && ratios.iter().all(|(_, r)| *r >= 1.5);
    let shown: Vec<String> = ratios.iter().map(|(t, r)| format!("{t}={r:.2}")).collect();
    Outcome::hard(pass, format!("{violations} flows with cu > plain; plain/cu avgerr {}", shown.join(" ")))
}

fn space_saving_bound(short: &Trace) -> Outcome {
    let truth = GroundTruth::from_stream(short.items());
    let ss = fill(SpaceSaving::new(100, SpaceSavingMode::Plain, Seed(1)).unwrap(), short.items());
    let limit = short.len() as f64 / 100.0;
    let violations = truth
        .iter()
        .filter(|(k, f)| {
            let over = ss.estimate(k).value() - *f as f64;
            !(0.0..=limit).contains(&over)
        })
        .count();
    Outcome::hard(violations == 0, format!("{violations} flows outside [0, N/M] of {}", truth.uniques()))
}

fn rap_improvement() -> Outcome {
    let results = map_runs(10, |s| {
        let trace = zipf(N, s as u64);
        let run = |mode| {
            let mut est = SpaceSaving::new(100, mode, Seed(s as u64)).unwrap();
            metrics::run_on_arrival(trace.items(), &mut est).unwrap().avgerr
        };
        (run(SpaceSavingMode::Plain), run(SpaceSavingMode::Rap))
    });
    let wins = results.iter().filter(|(plain, rap)| rap < plain).count();
    let (plain, rap) = results[0];
    Outcome::hard(wins >= 9, format!("rap better in {wins}/10 seeds (seed 0: plain {plain:.1}, rap {rap:.1})"))
}

fn nitro_unbiased(full: &Trace) -> Outcome {
    let top = FlowKey::from_u64(1);
    let f = GroundTruth::from_stream(full.items()).count(&top) as f64;
    let mean_of = |make: &(dyn Fn(Seed) -> Box<dyn FrequencyEstimator> + Sync)| {
        let estimates = map_runs(200, |s| {
            let mut est = make(Seed(s as u64));
            for k in full.items() {
                est.record(k).unwrap();
            }
            est.estimate(&top).value()
        });
        estimates.iter().sum::<f64>() / estimates.len() as f64
    };
    let hash = mean_of(&|seed| Box::new(HashEstimator::nitro(P, seed).unwrap()));
    let cuckoo = mean_of(&|seed| {
        Box::new(CuckooFilter::new(CuckooConfig::nitro(N, P), seed).unwrap())
    });
    let rel = |m: f64| (m - f).abs() / f;
    Outcome::hard(
        rel(hash) <= 0.05 && rel(cuckoo) <= 0.05,
        format!(
            "f={f}, nitrohash mean {hash:.0} ({:.2}%), nitrocuckoo mean {cuckoo:.0} ({:.2}%)",
            100.0 * rel(hash),
            100.0 * rel(cuckoo)
        ),
    )
}

fn nitro_convergence() -> Outcome {
    let threshold = (10.0 / P).ceil() as u64;
    let results = map_runs(10, |s| {
        let full = zipf(N, s as u64);
        let short = full.prefix(PREFIX).unwrap();
        let run = |trace: &Trace| {
            let mut est = HashEstimator::nitro(P, Seed(s as u64)).unwrap();
            metrics::run_per_flow_where(trace.items(), &mut est, |f| f >= threshold)
                .unwrap()
                .avgrelerr
        };
        // Diagnostic only: follow the flows that qualify in the prefix.
        let prefix_truth = GroundTruth::from_stream(short.items());
        let full_truth = GroundTruth::from_stream(full.items());
        let tracked: Vec<&FlowKey> = prefix_truth
            .iter()
            .filter(|(_, f)| *f >= threshold)
            .map(|(k, _)| k)
            .collect();
        let rel_err = |est: &HashEstimator, truth: &GroundTruth| {
            tracked
                .iter()
                .map(|k| {
                    let f = truth.count(k) as f64;
                    (est.estimate(k).value() - f).abs() / f
                })
                .sum::<f64>()
                / tracked.len() as f64
        };
        let est_short = fill(HashEstimator::nitro(P, Seed(s as u64)).unwrap(), short.items());
        let est_full = fill(HashEstimator::nitro(P, Seed(s as u64)).unwrap(), full.items());
        let same_flows = rel_err(&est_full, &full_truth) < rel_err(&est_short, &prefix_truth);
        (run(&short), run(&full), same_flows)
    });
    let wins = results.iter().filter(|(short, full, _)| full < short).count();
    let same_flow_wins = results.iter().filter(|r| r.2).count();
    let shown: Vec<String> = results.iter().map(|(a, b, _)| format!("{a:.3}->{b:.3}")).collect();
    Outcome::hard(
        wins >= 8,
        format!(
            "decreased in {wins}/10 seeds [{}]; info: over the flows qualifying in the prefix it \
             decreased in {same_flow_wins}/10",
            shown.join(" ")
        ),
    )
}

fn cuckoo_structure() -> Outcome {
    let filter = CuckooFilter::new(CuckooConfig::new(1 << 16), Seed(7)).unwrap();
    let involution = (0..1_000_000u64)
        .filter(|&i| {
            let pair = filter.index_pair(&FlowKey::from_u64(i));
            filter.alt_index(pair.i2, pair.fingerprint) != pair.i1
                || filter.alt_index(pair.i1, pair.fingerprint) != pair.i2
        })
        .count();

    let slots = 1 << 14;
    let target = (0.8 * slots as f64).ceil() as u64;
    let table_full: usize = map_runs(10, |s| {
        let mut filter = CuckooFilter::new(CuckooConfig::new(slots), Seed(s as u64)).unwrap();
        (0..target)
            .filter(|&i| filter.record(&FlowKey::from_u64(i + 1_000_000 * s as u64)).is_err())
            .count()
    })
    .into_iter()
    .sum();

    let slots = 1 << 17;
    let stored = 100_000u64;
    let mut filter =
        CuckooFilter::new(CuckooConfig::new(slots).with_fingerprint_bits(16), Seed(3)).unwrap();
    for i in 0..stored {
        filter.record(&FlowKey::from_u64(i)).unwrap();
    }
    let queries = 100_000u64;
    let hits = (stored..stored + queries)
        .filter(|&i| filter.estimate(&FlowKey::from_u64(i)).value() > 0.0)
        .count();
    let fp = hits as f64 / queries as f64;
    let limit = 2.0 * 4.0 * 2f64.powi(-16) * 4.0;
    Outcome::hard(
        involution == 0 && table_full == 0 && fp <= limit,
        format!(
            "{involution} involution violations, {table_full} table-full signals at 80% load, \
             fp {fp:.2e} at load {:.2} (limit {limit:.2e})",
            filter.load_factor()
        ),
    )
}

fn throughput(full: &Trace) -> Outcome {
    let params = EstimatorParams::default();
    let plan = RunPlan {
        runs: 5,
        base_seed: 0,
        warmup: true,
    };
    let rate = |protocol, algo| {
        let runs = harness::bench_throughput(protocol, algo, &params, full, &plan).unwrap();
        runs.iter().map(|r| r.ops_per_sec).sum::<f64>() / runs.len() as f64
    };
    use Algorithm::*;
    use ThroughputProtocol::*;
    let mut checks: Vec<(String, f64, f64)> = vec![
        ("write_only nitrohash/hash".into(), rate(WriteOnly, NitroHash) / rate(WriteOnly, Hash), 2.0),
        ("write_only nitrocms/cms".into(), rate(WriteOnly, NitroCms) / rate(WriteOnly, Cms), 2.0),
        ("read_only cuckoo/nitrocuckoo".into(), rate(ReadOnly, Cuckoo) / rate(ReadOnly, NitroCuckoo), 1.0),
        ("read_only nc_small/nitrocuckoo".into(), rate(ReadOnly, NcSmall) / rate(ReadOnly, NitroCuckoo), 1.0),
    ];
    for algo in Algorithm::ALL {
        checks.push((
            format!("write_only/write_read {algo}"),
            rate(WriteOnly, algo) / rate(WriteRead, algo),
            1.0,
        ));
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, ratio, min)| ratio < min)
        .map(|(name, ratio, min)| format!("{name}={ratio:.2} (want >= {min})"))
        .collect();
    let shown: Vec<String> = checks.iter().take(4).map(|(n, r, _)| format!("{n}={r:.2}")).collect();
    Outcome {
        pass: failed.is_empty(),
        soft: true,
        detail: if failed.is_empty() {
            format!("{}; write_read <= write_only for all", shown.join(", "))
        } else {
            format!("failed ratios: {}", failed.join(", "))
        },
    }
}

struct Zero;

impl FrequencyEstimator for Zero {
    fn record(&mut self, _: &FlowKey) -> Result<(), TableFull> {
        Ok(())
    }
    fn estimate(&self, _: &FlowKey) -> Estimate {
        Estimate::ZERO
    }
    fn memory_bytes(&self) -> usize {
        0
    }
    fn stored_items(&self) -> Option<usize> {
        Some(0)
    }
}

fn metric_fidelity(short: &Trace) -> Outcome {
    let params = EstimatorParams::default();
    let mut mismatches = Vec::new();
    for algo in Algorithm::ALL {
        let reports = harness::accuracy_run(algo, &params, short.items(), Seed(5)).unwrap();
        for r in reports {
            if r.msre_as_written != r.avgerr {
                mismatches.push(format!("{algo}/{}", r.protocol.tag()));
            }
        }
    }
    let mut zero_exact = true;
    for trace in [short, &zipf(12_345, 99)] {
        let report = metrics::run_per_flow(trace.items(), &mut Zero).unwrap();
        let expected = trace.len() as f64 / trace.stats().n_uniques as f64;
        zero_exact &= report.avgerr == expected;
    }
    Outcome::hard(
        mismatches.is_empty() && zero_exact,
        format!("msre != avgerr for {mismatches:?}; zero estimator per-flow avgerr == N/M: {zero_exact}"),
    )
}

fn memory_accounting(short: &Trace) -> Outcome {
    let ss = fill(
        SpaceSaving::with_epsilon(0.01, SpaceSavingMode::Plain, Seed(1)).unwrap(),
        short.items(),
    );
    let ss_ok = ss.budget() == 100 && ss.len() == 100 && ss.memory_bytes() == 800;
    let mut cuckoo_ok = true;
    for capacity in [1 << 12, 1 << 16, 1 << 20] {
        let params = EstimatorParams {
            capacity: Some(capacity),
            ..EstimatorParams::default()
        };
        for algo in [Algorithm::Cuckoo, Algorithm::NitroCuckoo] {
            let est = AnyEstimator::build(algo, &params, Seed(1), short.len()).unwrap();
            cuckoo_ok &= est.memory_bytes() == capacity * 12;
        }
    }
    let cms = sketch(CmsMode::Conservative, Seed(1));
    let cms_ok = cms.memory_bytes() == 272 * 5 * 4;
    Outcome::hard(
        ss_ok && cuckoo_ok && cms_ok,
        format!(
            "spacesaving {} entries / {} bytes, cuckoo capacity x 12: {cuckoo_ok}, cms 272x5 = {} bytes",
            ss.len(),
            ss.memory_bytes(),
            cms.memory_bytes()
        ),
    )
}

#[test]
fn acceptance() {
    let full = zipf(N, 0);
    let short = full.prefix(PREFIX).unwrap();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("exactness baseline", Box::new(|| exactness(&full))),
        ("cms one-sidedness", Box::new(|| cms_one_sided(&short))),
        ("cms probabilistic bound", Box::new(|| cms_bound(&short))),
        ("conservative-update dominance", Box::new(|| conservative_dominance(&full))),
        ("space saving bound", Box::new(|| space_saving_bound(&short))),
        ("rap improvement", Box::new(rap_improvement)),
        ("nitro unbiasedness", Box::new(|| nitro_unbiased(&full))),
        ("nitro convergence", Box::new(nitro_convergence)),
        ("cuckoo structure", Box::new(cuckoo_structure)),
        ("throughput orderings (soft)", Box::new(|| throughput(&full))),
        ("metric fidelity", Box::new(|| metric_fidelity(&short))),
        ("memory accounting", Box::new(|| memory_accounting(&short))),
    ];

    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::hard(false, format!("panicked: {msg}"))
        });
        let status = match (outcome.pass, outcome.soft) {
            (true, _) => "PASS",
            (false, true) => "SOFT-FAIL",
            (false, false) => "FAIL",
        };
        println!("criterion {:>2} {status:<9} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass && !outcome.soft {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
