//! Residual statistics: mean, variance, and fixed-bin histograms of
//! degradation residuals.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default histogram bin count over [-1, 1].
pub const DEFAULT_BINS: usize = 201;

/// Summary statistics of a signed residual raster.
///
/// `variance` is the population variance (divides by the sample count), which
/// is what matches a noise model's sigma-squared.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualStats {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    /// Counts over equal-width bins spanning [-1, 1]; out-of-range samples
    /// land in the edge bins.
    pub histogram: Vec<u64>,
    pub sample_count: u64,
}

/// Two-pass mean/variance plus a fixed-bin histogram with `DEFAULT_BINS` bins.
pub fn stats(samples: &[f32]) -> Result<ResidualStats> {
    stats_with_bins(samples, DEFAULT_BINS)
}

/// As [`stats`] with an explicit bin count.
pub fn stats_with_bins(samples: &[f32], bins: usize) -> Result<ResidualStats> {
    if samples.is_empty() {
        return Err(Error::Argument("stats on empty input".into()));
    }
    if bins == 0 {
        return Err(Error::Argument("histogram needs at least one bin".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("stats input contains non-finite samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|v| *v as f64).sum::<f64>() / n;
    let variance = samples
        .iter()
        .map(|v| {
            let d = *v as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;

    let mut histogram = vec![0u64; bins];
    let scale = bins as f64 / 2.0;
    for v in samples {
        let idx = ((*v as f64 + 1.0) * scale).floor();
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        histogram[idx] += 1;
    }

    Ok(ResidualStats {
        mean,
        variance,
        std: variance.sqrt(),
        histogram,
        sample_count: samples.len() as u64,
    })
}

/// Pool several stats objects into one, as if computed over the concatenated
/// samples. Bin layouts must match.
pub fn merge_stats(parts: &[ResidualStats]) -> Result<ResidualStats> {
    if parts.is_empty() {
        return Err(Error::Argument("merge_stats on empty input".into()));
    }
    let bins = parts[0].histogram.len();
    if parts.iter().any(|p| p.histogram.len() != bins) {
        return Err(Error::Argument("merge_stats histogram widths differ".into()));
    }
    let total: u64 = parts.iter().map(|p| p.sample_count).sum();
    let n = total as f64;
    let mean = parts
        .iter()
        .map(|p| p.mean * p.sample_count as f64)
        .sum::<f64>()
        / n;
    // E[x^2] pooled from per-part mean/variance.
    let second = parts
        .iter()
        .map(|p| (p.variance + p.mean * p.mean) * p.sample_count as f64)
        .sum::<f64>()
        / n;
    let variance = (second - mean * mean).max(0.0);
    let mut histogram = vec![0u64; bins];
    for p in parts {
        for (h, c) in histogram.iter_mut().zip(p.histogram.iter()) {
            *h += c;
        }
    }
    Ok(ResidualStats {
        mean,
        variance,
        std: variance.sqrt(),
        histogram,
        sample_count: total,
    })
}

/// Symmetric chi-square distance between two histograms, after normalizing
/// each to unit mass. Zero iff the normalized histograms agree.
pub fn chi_square_distance(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len(), "histogram lengths differ");
    let na: f64 = a.iter().map(|v| *v as f64).sum();
    let nb: f64 = b.iter().map(|v| *v as f64).sum();
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let p = *x as f64 / na;
        let q = *y as f64 / nb;
        let s = p + q;
        if s > 0.0 {
            acc += (p - q) * (p - q) / s;
        }
    }
    acc
}
