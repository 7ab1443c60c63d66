//! Byte-level statistics in the style of the `ent` utility.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nist::igamc;

/// Bytes per Monte Carlo point pair (three for each coordinate).
const MONTE_CARLO_GROUP: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntReport {
    pub bytes: usize,
    pub entropy_bits_per_byte: f64,
    /// Whole percent by which an optimal coder could shrink the input.
    pub optimum_compression_pct: f64,
    pub chi_square: f64,
    /// Percent of the time a truly random sequence would exceed `chi_square`.
    pub chi_square_exceed_pct: f64,
    pub arithmetic_mean: f64,
    pub monte_carlo_pi: f64,
    pub monte_carlo_error_pct: f64,
    /// Circular lag-1 correlation; `None` for constant input.
    pub serial_correlation: Option<f64>,
}

impl EntReport {
    /// The classic verdict: the chi-square exceedance percentage lies in
    /// `[1, 99]`.
    pub fn chi_square_plausible(&self) -> bool {
        (1.0..=99.0).contains(&self.chi_square_exceed_pct)
    }
}

/// Occurrence count of every byte value.
pub fn byte_counts(bytes: &[u8]) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    counts
}

/// `sum p log2(1/p)` over the non-empty symbol counts.
pub fn shannon_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Entropy in bits per byte of an 8-bit sequence.
pub fn byte_entropy(bytes: &[u8]) -> f64 {
    shannon_entropy(&byte_counts(bytes))
}

/// Pearson chi-square of `counts` against equal expected frequencies, and
/// its upper-tail probability.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (counts.len() - 1) as f64;
    (chi2, igamc(dof / 2.0, chi2 / 2.0))
}

fn monte_carlo_pi(bytes: &[u8]) -> f64 {
    let radius = ((1u64 << 24) - 1) as f64;
    let radius_sq = radius * radius;
    let mut inside = 0u64;
    let mut tries = 0u64;
    for group in bytes.chunks_exact(MONTE_CARLO_GROUP) {
        let x = u32::from_be_bytes([0, group[0], group[1], group[2]]) as f64;
        let y = u32::from_be_bytes([0, group[3], group[4], group[5]]) as f64;
        tries += 1;
        if x * x + y * y <= radius_sq {
            inside += 1;
        }
    }
    if tries == 0 {
        return f64::NAN;
    }
    4.0 * inside as f64 / tries as f64
}

fn serial_correlation(bytes: &[u8]) -> Option<f64> {
    let n = bytes.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut lagged = 0.0;
    for (i, &b) in bytes.iter().enumerate() {
        let u = b as f64;
        let next = bytes[(i + 1) % bytes.len()] as f64;
        sum += u;
        sum_sq += u * u;
        lagged += u * next;
    }
    let denom = n * sum_sq - sum * sum;
    if denom == 0.0 {
        return None;
    }
    Some(((n * lagged - sum * sum) / denom).clamp(-1.0, 1.0))
}

/// Computes the six byte statistics.
pub fn ent_battery(bytes: &[u8]) -> Result<EntReport> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts = byte_counts(bytes);
    let entropy = shannon_entropy(&counts);
    let (chi2, exceed) = chi_square_uniform(&counts);
    let mean = bytes.iter().map(|&b| b as f64).sum::<f64>() / bytes.len() as f64;
    let pi = monte_carlo_pi(bytes);
    Ok(EntReport {
        bytes: bytes.len(),
        entropy_bits_per_byte: entropy,
        optimum_compression_pct: ((8.0 - entropy) / 8.0 * 100.0).round(),
        chi_square: chi2,
        chi_square_exceed_pct: exceed * 100.0,
        arithmetic_mean: mean,
        monte_carlo_pi: pi,
        monte_carlo_error_pct: (pi - std::f64::consts::PI).abs() / std::f64::consts::PI * 100.0,
        serial_correlation: serial_correlation(bytes),
    })
}
