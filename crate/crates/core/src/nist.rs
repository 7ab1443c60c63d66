//! A subset of the NIST SP 800-22 statistical tests.
//!
//! Implemented: frequency (monobit), frequency within a block, runs,
//! longest run of ones in a block, cumulative sums (forward and reverse),
//! approximate entropy, serial, and the discrete Fourier transform test.
//! Every test returns a statistic and one or more p-values; a stream passes
//! a test when each of its p-values is at least [`ALPHA`].

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Serialize, Serializer};
use statrs::function::erf::erfc;
use statrs::function::gamma::checked_gamma_ur;

use crate::error::{Error, Result};
use crate::prbg::BitStream;

/// Significance level for every test.
pub const ALPHA: f64 = 0.01;

/// Minimum stream length for most tests.
pub const MIN_BITS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NistTest {
    Monobit,
    BlockFrequency,
    Runs,
    LongestRun,
    CusumForward,
    CusumReverse,
    ApproximateEntropy,
    Serial,
    Dft,
}

impl NistTest {
    pub const ALL: [NistTest; 9] = [
        NistTest::Monobit,
        NistTest::BlockFrequency,
        NistTest::Runs,
        NistTest::LongestRun,
        NistTest::CusumForward,
        NistTest::CusumReverse,
        NistTest::ApproximateEntropy,
        NistTest::Serial,
        NistTest::Dft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NistTest::Monobit => "monobit",
            NistTest::BlockFrequency => "block_frequency",
            NistTest::Runs => "runs",
            NistTest::LongestRun => "longest_run",
            NistTest::CusumForward => "cusum_forward",
            NistTest::CusumReverse => "cusum_reverse",
            NistTest::ApproximateEntropy => "approximate_entropy",
            NistTest::Serial => "serial",
            NistTest::Dft => "dft",
        }
    }

    fn min_bits(self) -> usize {
        match self {
            NistTest::LongestRun => 128,
            NistTest::Dft => 1000,
            _ => MIN_BITS,
        }
    }
}

impl fmt::Display for NistTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NistTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NistTest::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTest(s.to_owned()))
    }
}

impl Serialize for NistTest {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// Block sizes and template lengths for the parameterized tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NistParams {
    pub block_frequency_m: usize,
    pub approximate_entropy_m: usize,
    pub serial_m: usize,
}

impl Default for NistParams {
    fn default() -> Self {
        Self {
            block_frequency_m: 128,
            approximate_entropy_m: 2,
            serial_m: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_values: Vec<f64>,
}

impl TestOutcome {
    fn single(statistic: f64, p_value: f64) -> Self {
        Self {
            statistic,
            p_values: vec![p_value],
        }
    }

    /// First (or only) p-value.
    pub fn p_value(&self) -> f64 {
        self.p_values[0]
    }

    pub fn passed(&self) -> bool {
        self.p_values.iter().all(|&p| p >= ALPHA)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`, with `Q(a, 0) = 1`.
pub(crate) fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    checked_gamma_ur(a, x).unwrap_or(0.0).clamp(0.0, 1.0)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn check_len(test: NistTest, bits: &[u8]) -> Result<()> {
    let min = test.min_bits();
    if bits.len() < min {
        return Err(Error::StreamTooShort {
            test: test.name(),
            min,
            got: bits.len(),
        });
    }
    Ok(())
}

fn invalid(test: NistTest, reason: impl Into<String>) -> Error {
    Error::InvalidTestParameter {
        test: test.name(),
        reason: reason.into(),
    }
}

/// Runs one test on a stream.
pub fn nist_test(test: NistTest, bits: &BitStream, params: &NistParams) -> Result<TestOutcome> {
    let b = bits.bits();
    check_len(test, b)?;
    match test {
        NistTest::Monobit => Ok(monobit(b)),
        NistTest::BlockFrequency => block_frequency(b, params.block_frequency_m),
        NistTest::Runs => Ok(runs(b)),
        NistTest::LongestRun => Ok(longest_run(b)),
        NistTest::CusumForward => Ok(cusum(b.iter().copied())),
        NistTest::CusumReverse => Ok(cusum(b.iter().rev().copied())),
        NistTest::ApproximateEntropy => approximate_entropy(b, params.approximate_entropy_m),
        NistTest::Serial => serial(b, params.serial_m),
        NistTest::Dft => Ok(dft(b)),
    }
}

fn monobit(bits: &[u8]) -> TestOutcome {
    let n = bits.len() as f64;
    let sum: i64 = bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).sum();
    let s_obs = (sum as f64).abs() / n.sqrt();
    TestOutcome::single(s_obs, erfc(s_obs / SQRT_2))
}

fn block_frequency(bits: &[u8], m: usize) -> Result<TestOutcome> {
    let test = NistTest::BlockFrequency;
    if m == 0 || m > bits.len() {
        return Err(invalid(
            test,
            format!("block size {m} for {} bits", bits.len()),
        ));
    }
    let blocks = bits.len() / m;
    let sum: f64 = bits
        .chunks_exact(m)
        .map(|block| {
            let pi = block.iter().filter(|&&b| b == 1).count() as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum();
    let chi2 = 4.0 * m as f64 * sum;
    Ok(TestOutcome::single(
        chi2,
        igamc(blocks as f64 / 2.0, chi2 / 2.0),
    ))
}

fn runs(bits: &[u8]) -> TestOutcome {
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b == 1).count() as f64 / n;
    // Frequency prerequisite: a badly biased stream fails without computing runs.
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return TestOutcome::single(f64::NAN, 0.0);
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = v_obs as f64;
    let p =
        erfc((v - 2.0 * n * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)));
    TestOutcome::single(v, p)
}

fn longest_run(bits: &[u8]) -> TestOutcome {
    let n = bits.len();
    // (block size, smallest class run length, class probabilities)
    let (m, lowest, probs): (usize, usize, &[f64]) = if n < 6272 {
        (8, 1, &[0.2148, 0.3672, 0.2305, 0.1875])
    } else if n < 750_000 {
        (128, 4, &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124])
    } else {
        (
            10_000,
            10,
            &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
        )
    };
    let k = probs.len() - 1;
    let blocks = n / m;
    let mut counts = vec![0usize; probs.len()];
    for block in bits.chunks_exact(m) {
        let mut longest = 0usize;
        let mut current = 0;
        for &b in block {
            if b == 1 {
                current += 1;
                longest = longest.max(current);
            } else {
                current = 0;
            }
        }
        counts[longest.saturating_sub(lowest).min(k)] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&v, &p)| (v as f64 - nb * p).powi(2) / (nb * p))
        .sum();
    TestOutcome::single(chi2, igamc(k as f64 / 2.0, chi2 / 2.0))
}

fn cusum(bits: impl Iterator<Item = u8>) -> TestOutcome {
    let mut n = 0usize;
    let mut partial = 0i64;
    let mut z = 0i64;
    for b in bits {
        n += 1;
        partial += if b == 1 { 1 } else { -1 };
        z = z.max(partial.abs());
    }
    let nf = n as f64;
    let zf = z as f64;
    if z == 0 {
        return TestOutcome::single(0.0, 0.0);
    }
    let sqrt_n = nf.sqrt();
    let term = |lo: f64, hi: f64, a: f64, b: f64| -> f64 {
        let start = lo.floor() as i64;
        let end = hi.floor() as i64;
        (start..=end)
            .map(|k| {
                let k = k as f64;
                normal_cdf((4.0 * k + a) * zf / sqrt_n) - normal_cdf((4.0 * k + b) * zf / sqrt_n)
            })
            .sum()
    };
    let s1 = term((-nf / zf + 1.0) / 4.0, (nf / zf - 1.0) / 4.0, 1.0, -1.0);
    let s2 = term((-nf / zf - 3.0) / 4.0, (nf / zf - 1.0) / 4.0, 3.0, 1.0);
    TestOutcome::single(zf, (1.0 - s1 + s2).clamp(0.0, 1.0))
}

/// Frequencies of every overlapping `m`-bit pattern, wrapping around the end.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for &b in &bits[..m - 1] {
        window = (window << 1) | b as usize;
    }
    for i in 0..n {
        let b = bits[(i + m - 1) % n];
        window = ((window << 1) | b as usize) & mask;
        counts[window] += 1;
    }
    counts
}

fn approximate_entropy(bits: &[u8], m: usize) -> Result<TestOutcome> {
    let test = NistTest::ApproximateEntropy;
    if m == 0 || m + 1 >= bits.len() || m > 24 {
        return Err(invalid(
            test,
            format!("block length {m} for {} bits", bits.len()),
        ));
    }
    let n = bits.len() as f64;
    let phi = |m: usize| -> f64 {
        pattern_counts(bits, m)
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum()
    };
    let apen = phi(m) - phi(m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    Ok(TestOutcome::single(
        chi2,
        igamc(2f64.powi(m as i32 - 1), chi2 / 2.0),
    ))
}

fn serial(bits: &[u8], m: usize) -> Result<TestOutcome> {
    let test = NistTest::Serial;
    if m < 2 || m >= bits.len() || m > 24 {
        return Err(invalid(
            test,
            format!("block length {m} for {} bits", bits.len()),
        ));
    }
    let n = bits.len() as f64;
    let psi2 = |m: usize| -> f64 {
        if m == 0 {
            return 0.0;
        }
        let sum: f64 = pattern_counts(bits, m)
            .into_iter()
            .map(|c| (c as f64).powi(2))
            .sum();
        2f64.powi(m as i32) / n * sum - n
    };
    let (p0, p1, p2) = (psi2(m), psi2(m - 1), psi2(m - 2));
    let del1 = p0 - p1;
    let del2 = p0 - 2.0 * p1 + p2;
    Ok(TestOutcome {
        statistic: del1,
        p_values: vec![
            igamc(2f64.powi(m as i32 - 2), del1 / 2.0),
            igamc(2f64.powi(m as i32 - 3), del2 / 2.0),
        ],
    })
}

fn dft(bits: &[u8]) -> TestOutcome {
    let n = bits.len();
    let mut buffer: Vec<Complex<f64>> = bits
        .iter()
        .map(|&b| Complex::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let below = buffer[..n / 2]
        .iter()
        .filter(|c| c.norm() < threshold)
        .count() as f64;
    let expected = 0.95 * nf / 2.0;
    let d = (below - expected) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    TestOutcome::single(d, erfc(d.abs() / SQRT_2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestEntry {
    pub test: NistTest,
    pub stream: usize,
    pub statistic: f64,
    pub p_values: Vec<f64>,
    pub passed: bool,
}

/// Pass proportion of one test across all streams.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionSummary {
    pub test: NistTest,
    pub passed: usize,
    pub total: usize,
    pub proportion: f64,
    /// Lower edge of the acceptable proportion interval.
    pub min_proportion: f64,
    /// Chi-square uniformity p-value of the first p-value across streams
    /// (ten bins); `None` with fewer than ten streams.
    pub uniformity_p: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamMeta {
    pub key_fingerprint: Option<String>,
    pub streams: usize,
    pub stream_bits: usize,
}

/// Results of one battery run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub battery: String,
    pub alpha: f64,
    pub params: NistParams,
    pub stream_meta: StreamMeta,
    pub summary: Vec<ProportionSummary>,
    pub entries: Vec<TestEntry>,
}

impl TestReport {
    /// True when every test meets its minimum pass proportion.
    pub fn all_ok(&self) -> bool {
        self.summary.iter().all(|s| s.ok)
    }

    pub fn summary_for(&self, test: NistTest) -> Option<&ProportionSummary> {
        self.summary.iter().find(|s| s.test == test)
    }
}

/// `p - 3 sqrt(p (1 - p) / m)` with `p = 1 - ALPHA`.
pub fn min_pass_proportion(streams: usize) -> f64 {
    let p = 1.0 - ALPHA;
    p - 3.0 * (p * (1.0 - p) / streams as f64).sqrt()
}

/// Ten-bin chi-square uniformity check over a set of p-values.
pub fn pvalue_uniformity(p_values: &[f64]) -> Option<f64> {
    if p_values.len() < 10 {
        return None;
    }
    let mut bins = [0usize; 10];
    for &p in p_values {
        bins[((p * 10.0) as usize).min(9)] += 1;
    }
    let expected = p_values.len() as f64 / 10.0;
    let chi2: f64 = bins
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    Some(igamc(4.5, chi2 / 2.0))
}

/// Runs every implemented test on every stream.
pub fn nist_battery(streams: &[BitStream], params: &NistParams) -> Result<TestReport> {
    if streams.is_empty() {
        return Err(Error::EmptyInput);
    }
    let per_stream: Vec<Vec<TestOutcome>> = streams
        .par_iter()
        .map(|s| {
            NistTest::ALL
                .iter()
                .map(|&t| nist_test(t, s, params))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let total = streams.len();
    let min_proportion = min_pass_proportion(total);
    let mut entries = Vec::with_capacity(total * NistTest::ALL.len());
    let mut summary = Vec::with_capacity(NistTest::ALL.len());
    for (ti, &test) in NistTest::ALL.iter().enumerate() {
        let mut passed = 0;
        let mut firsts = Vec::with_capacity(total);
        for (si, outcomes) in per_stream.iter().enumerate() {
            let o = &outcomes[ti];
            let ok = o.passed();
            passed += usize::from(ok);
            firsts.push(o.p_value());
            entries.push(TestEntry {
                test,
                stream: si,
                statistic: o.statistic,
                p_values: o.p_values.clone(),
                passed: ok,
            });
        }
        let proportion = passed as f64 / total as f64;
        summary.push(ProportionSummary {
            test,
            passed,
            total,
            proportion,
            min_proportion,
            uniformity_p: pvalue_uniformity(&firsts),
            ok: proportion >= min_proportion,
        });
    }

    let stream_bits = streams.iter().map(BitStream::len).min().unwrap_or(0);
    Ok(TestReport {
        battery: "nist-sp800-22-subset".to_owned(),
        alpha: ALPHA,
        params: *params,
        stream_meta: StreamMeta {
            key_fingerprint: streams[0].key_fingerprint().map(str::to_owned),
            streams: total,
            stream_bits,
        },
        summary,
        entries,
    })
}

/// One-sample Kolmogorov-Smirnov distance between `samples` and U(0,1).
pub fn ks_uniform_statistic(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}
