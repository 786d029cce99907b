use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flowsketch::{Seed, Trace, ZipfSpec};
use flowsketch_bench::harness::{self, RunPlan, ThroughputProtocol};
use flowsketch_bench::{Algorithm, BenchReport, EstimatorParams};

#[derive(Parser)]
#[command(name = "flowsketch", version, about = "Frequency-estimation sketch benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure throughput (items per second).
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "all")]
        protocol: ProtocolArg,
        /// Skip the discarded warm-up pass.
        #[arg(long)]
        no_warmup: bool,
    },
    /// Measure the error metrics under all three evaluation protocols.
    Accuracy {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Report accounted memory and stored items.
    Memory {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write a synthetic Zipf trace, one key per line.
    Gen {
        /// n_items,universe,alpha,seed
        #[arg(long, value_parser = parse_zipf)]
        zipf: ZipfSpec,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    #[value(name = "write_only", alias = "write-only")]
    WriteOnly,
    #[value(name = "write_read", alias = "write-read")]
    WriteRead,
    #[value(name = "read_only", alias = "read-only")]
    ReadOnly,
    All,
}

#[derive(Args)]
struct CommonArgs {
    /// Comma-separated algorithm names, or `all`.
    #[arg(long, default_value = "all")]
    algo: String,
    /// Trace file, one key per line.
    #[arg(long, conflicts_with = "zipf", required_unless_present = "zipf")]
    trace: Option<PathBuf>,
    /// Synthetic trace: n_items,universe,alpha,seed
    #[arg(long, value_parser = parse_zipf)]
    zipf: Option<ZipfSpec>,
    /// Sampling probability of the Nitro variants.
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 13)]
    runs: u32,
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cuckoo table slots (default: one per trace item).
    #[arg(long)]
    capacity: Option<usize>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_zipf(s: &str) -> Result<ZipfSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, u, a, seed] = parts[..] else {
        return Err(format!("expected n_items,universe,alpha,seed, got `{s}`"));
    };
    let bad = |what: &str| format!("invalid {what} in `{s}`");
    Ok(ZipfSpec {
        n_items: n.parse().map_err(|_| bad("n_items"))?,
        universe: u.parse().map_err(|_| bad("universe"))?,
        alpha: a.parse().map_err(|_| bad("alpha"))?,
        seed: Seed(seed.parse().map_err(|_| bad("seed"))?),
    })
}

impl CommonArgs {
    fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.algo == "all" {
            return Ok(Algorithm::ALL.to_vec());
        }
        let mut algos = self
            .algo
            .split(',')
            .map(|s| s.trim().parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()?;
        algos.sort();
        algos.dedup();
        Ok(algos)
    }

    fn load_trace(&self) -> Result<Trace> {
        match (&self.trace, &self.zipf) {
            (Some(path), None) => {
                Trace::load(path).with_context(|| format!("loading trace {}", path.display()))
            }
            (None, Some(spec)) => Ok(Trace::zipf(spec)?),
            _ => bail!("exactly one of --trace or --zipf is required"),
        }
    }

    fn params(&self) -> EstimatorParams {
        EstimatorParams {
            p: self.p,
            epsilon: self.epsilon,
            delta: self.delta,
            capacity: self.capacity,
        }
    }

    fn plan(&self, warmup: bool) -> RunPlan {
        RunPlan {
            runs: self.runs,
            base_seed: self.seed,
            warmup,
        }
    }

    fn emit(&self, report: &BenchReport) -> Result<()> {
        match &self.out {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                report.write_csv(file)?;
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                report.write_csv(&mut lock)?;
                lock.flush()?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { zipf, out } => {
            let trace = Trace::zipf(&zipf)?;
            trace.save(&out)?;
            eprintln!(
                "wrote {} items ({} distinct) to {}",
                trace.stats().n_items,
                trace.stats().n_uniques,
                out.display()
            );
        }
        Command::Bench {
            common,
            protocol,
            no_warmup,
        } => {
            let algos = common.algorithms()?;
            let trace = common.load_trace()?;
            let params = common.params();
            let plan = common.plan(!no_warmup);
            let protocols = match protocol {
                ProtocolArg::WriteOnly => vec![ThroughputProtocol::WriteOnly],
                ProtocolArg::WriteRead => vec![ThroughputProtocol::WriteRead],
                ProtocolArg::ReadOnly => vec![ThroughputProtocol::ReadOnly],
                ProtocolArg::All => ThroughputProtocol::ALL.to_vec(),
            };
            let mut report = BenchReport::default();
            for &algo in &algos {
                for &proto in &protocols {
                    let runs = harness::bench_throughput(proto, algo, &params, &trace, &plan)?;
                    report.extend(harness::throughput_rows(algo, proto, &trace, &runs)?);
                }
            }
            common.emit(&report)?;
        }
        Command::Accuracy { common } => {
            let algos = common.algorithms()?;
            let trace = common.load_trace()?;
            let params = common.params();
            let plan = common.plan(false);
            let mut report = BenchReport::default();
            for &algo in &algos {
                let runs = harness::bench_accuracy(algo, &params, &trace, &plan)?;
                report.extend(harness::accuracy_rows(algo, &trace, &runs)?);
            }
            common.emit(&report)?;
        }
        Command::Memory { common } => {
            let algos = common.algorithms()?;
            let trace = common.load_trace()?;
            let params = common.params();
            let plan = common.plan(false);
            let mut report = BenchReport::default();
            for &algo in &algos {
                let runs = harness::bench_memory(algo, &params, &trace, &plan)?;
                report.extend(harness::memory_rows(algo, &trace, &runs)?);
            }
            common.emit(&report)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
