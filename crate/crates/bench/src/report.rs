//! Aggregated benchmark rows and their CSV form.
//!
//! Header: `algorithm,trace,protocol,metric,mean,ci95,runs,units`. Rows are
//! sorted by (algorithm, protocol, metric); `mean` and `ci95` are written in
//! scientific notation with ten significant digits.

use std::io::Write;

use crate::algorithm::Algorithm;
use crate::stats::aggregate;
use crate::BenchError;

pub const CSV_HEADER: [&str; 8] = [
    "algorithm", "trace", "protocol", "metric", "mean", "ci95", "runs", "units",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub algorithm: Algorithm,
    pub trace: String,
    pub protocol: String,
    pub metric: String,
    pub mean: f64,
    pub ci95: f64,
    pub runs: usize,
    pub units: &'static str,
}

impl Row {
    /// Aggregates per-run `values` into one row.
    pub fn aggregate(
        algorithm: Algorithm,
        trace: &str,
        protocol: &str,
        metric: &str,
        units: &'static str,
        values: &[f64],
    ) -> Result<Row, BenchError> {
        let (mean, ci95) = aggregate(values)?;
        Ok(Row {
            algorithm,
            trace: trace.to_string(),
            protocol: protocol.to_string(),
            metric: metric.to_string(),
            mean,
            ci95,
            runs: values.len(),
            units,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<Row>,
}

impl BenchReport {
    pub fn extend(&mut self, rows: impl IntoIterator<Item = Row>) {
        self.rows.extend(rows);
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.algorithm.name(), &a.protocol, &a.metric, &a.trace)
                .cmp(&(b.algorithm.name(), &b.protocol, &b.metric, &b.trace))
        });
    }

    pub fn find(&self, algorithm: Algorithm, protocol: &str, metric: &str) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.protocol == protocol && r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut rows: Vec<&Row> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (a.algorithm.name(), &a.protocol, &a.metric, &a.trace)
                .cmp(&(b.algorithm.name(), &b.protocol, &b.metric, &b.trace))
        });
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in rows {
            w.write_record([
                r.algorithm.name(),
                &r.trace,
                &r.protocol,
                &r.metric,
                &format!("{:.9e}", r.mean),
                &format!("{:.9e}", r.ci95),
                &r.runs.to_string(),
                r.units,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
