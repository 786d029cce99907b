use crate::BenchError;

/// Normal-approximation multiplier for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Mean and 95% confidence half-width `1.96 · s / √n` of repeated runs,
/// with `s` the sample standard deviation. The half-width is 0 for one run.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64), BenchError> {
    if values.is_empty() {
        return Err(BenchError::NoRuns);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Z_95 * var.sqrt() / n.sqrt()))
}
