//! Traces: fully resident, immutable sequences of flow keys, loaded from
//! line-oriented files or generated from a seeded Zipf law.
//!
//! File format: UTF-8 text, one key per line, LF or CRLF endings, no header.
//! Blank lines are rejected.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::error::Error;
use crate::key::{FlowKey, Seed};
use crate::sampling::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceStats {
    pub n_items: usize,
    pub n_uniques: usize,
}

impl TraceStats {
    fn of(items: &[FlowKey]) -> Self {
        let uniques: HashSet<&FlowKey> = items.iter().collect();
        TraceStats {
            n_items: items.len(),
            n_uniques: uniques.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    name: String,
    items: Vec<FlowKey>,
    stats: TraceStats,
}

impl Trace {
    pub fn from_items(name: impl Into<String>, items: Vec<FlowKey>) -> Result<Self, Error> {
        if items.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let stats = TraceStats::of(&items);
        Ok(Trace {
            name: name.into(),
            items,
            stats,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let malformed = |line: usize, reason| Error::MalformedLine {
            path: path.to_path_buf(),
            line,
            reason,
        };

        let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
        let mut items = Vec::new();
        if !body.is_empty() {
            for (i, raw) in body.split(|&b| b == b'\n').enumerate() {
                let line = raw.strip_suffix(b"\r").unwrap_or(raw);
                if line.is_empty() {
                    return Err(malformed(i + 1, "blank line"));
                }
                if std::str::from_utf8(line).is_err() {
                    return Err(malformed(i + 1, "invalid UTF-8"));
                }
                if line.contains(&b'\r') {
                    return Err(malformed(i + 1, "stray carriage return"));
                }
                items.push(FlowKey::new(line)?);
            }
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Trace::from_items(name, items)
    }

    /// Writes the trace in the loadable line format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = fs::File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        for key in &self.items {
            out.write_all(key.as_bytes()).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn zipf(spec: &ZipfSpec) -> Result<Self, Error> {
        let sampler = ZipfSampler::new(spec.universe, spec.alpha)?;
        if spec.n_items == 0 {
            return Err(Error::EmptyTrace);
        }
        let mut rng = rng_from_seed(spec.seed);
        let items = (0..spec.n_items)
            .map(|_| FlowKey::from_u64(sampler.sample(&mut rng)))
            .collect();
        Trace::from_items(spec.to_string(), items)
    }

    /// The first `k` items, with stats recomputed.
    pub fn prefix(&self, k: usize) -> Result<Self, Error> {
        if k == 0 || k > self.items.len() {
            return Err(Error::PrefixOutOfRange {
                requested: k,
                available: self.items.len(),
            });
        }
        let name = if k == self.items.len() {
            self.name.clone()
        } else {
            format!("{}[..{k}]", self.name)
        };
        Trace::from_items(name, self.items[..k].to_vec())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[FlowKey] {
        &self.items
    }

    pub fn stats(&self) -> TraceStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Parameters of a synthetic Zipf stream. Rank `i` in `1..=universe` is drawn
/// with probability proportional to `1 / i^alpha`; its key is the decimal rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZipfSpec {
    pub n_items: usize,
    pub universe: u64,
    pub alpha: f64,
    pub seed: Seed,
}

impl fmt::Display for ZipfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "zipf-n{}-u{}-a{}-s{}",
            self.n_items, self.universe, self.alpha, self.seed.0
        )
    }
}

/// Inverse-CDF sampler over precomputed cumulative weights.
#[derive(Clone, Debug)]
pub struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(universe: u64, alpha: f64) -> Result<Self, Error> {
        if !(alpha >= 0.0) {
            return Err(Error::NegativeSkew(alpha));
        }
        if universe == 0 {
            return Err(Error::InvalidConfig("zipf universe must be positive".into()));
        }
        let mut total = 0.0;
        let cumulative = (1..=universe)
            .map(|i| {
                total += (i as f64).powf(-alpha);
                total
            })
            .collect();
        Ok(ZipfSampler { cumulative })
    }

    /// Draws a rank in `1..=universe`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("non-empty universe");
        let target = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1) as u64 + 1
    }

    /// Probability of `rank`.
    pub fn pmf(&self, rank: u64) -> f64 {
        let i = rank as usize - 1;
        let lower = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lower) / self.cumulative.last().unwrap()
    }
}
