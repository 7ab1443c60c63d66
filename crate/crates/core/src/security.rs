//! Key-space accounting, correlation, sensitivity and differential analysis.

use rayon::prelude::*;
use serde::Serialize;

use crate::ent::{byte_entropy, chi_square_uniform};
use crate::error::{Error, Result};
use crate::map::{orbit, MapKey};
use crate::prbg::{quantize, quantize_bytes};

/// Pearson correlation coefficient of two equal-length sequences.
///
/// Evaluated in centered form, which is algebraically the same as the
/// raw-sum expression `(L Σxy - Σx Σy) / sqrt((L Σx² - (Σx)²)(L Σy² - (Σy)²))`
/// but does not cancel catastrophically for long sequences.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::CountTooSmall {
            what: "sequence length",
            min: 2,
            got: x.len(),
        });
    }
    let constant = |s: &[f64]| s.iter().all(|&v| v == s[0]);
    if constant(x) || constant(y) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Differential {
    pub uaci_pct: f64,
    pub npcr_pct: f64,
}

/// UACI on the raw states and NPCR on their 8-bit quantization.
pub fn differential(t1: &[f64], t2: &[f64]) -> Result<Differential> {
    if t1.len() != t2.len() {
        return Err(Error::LengthMismatch(t1.len(), t2.len()));
    }
    if t1.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = t1.len() as f64;
    let mut abs_diff = 0.0;
    let mut changed = 0usize;
    for (&a, &b) in t1.iter().zip(t2) {
        abs_diff += (a - b).abs();
        changed += usize::from(quantize(a) != quantize(b));
    }
    Ok(Differential {
        uaci_pct: 100.0 * abs_diff / n,
        npcr_pct: 100.0 * changed as f64 / n,
    })
}

/// Which key component a sweep perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Vary {
    Mu,
    X0,
}

impl Vary {
    fn base_value(self, key: &MapKey) -> f64 {
        match self {
            Vary::Mu => key.mu(),
            Vary::X0 => key.x0(),
        }
    }

    fn with_value(self, key: &MapKey, value: f64) -> Result<MapKey> {
        match self {
            Vary::Mu => key.with_mu(value),
            Vary::X0 => key.with_x0(value),
        }
    }

    /// `base + k * delta` applied to this component, or an error if the
    /// result leaves the key's valid range.
    pub fn perturb(self, key: &MapKey, k: usize, delta: f64) -> Result<MapKey> {
        let value = self.base_value(key) + k as f64 * delta;
        self.with_value(key, value)
            .map_err(|e| Error::PerturbationOutOfRange(Box::new(e)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub base: MapKey,
    pub vary: Vary,
    pub delta: f64,
    pub pairs: usize,
    pub len: usize,
    pub burn_in: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMetrics {
    /// Perturbation index `k` (the pair compares `base` with `base + k*delta`).
    pub index: usize,
    pub perturbed_value: f64,
    pub correlation: f64,
    pub uaci_pct: f64,
    pub npcr_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

impl Aggregate {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        let (mut min, mut max, mut sum, mut sum_abs, mut max_abs) =
            (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0.0, 0.0f64);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            sum_abs += v.abs();
            max_abs = max_abs.max(v.abs());
        }
        Self {
            min,
            max,
            mean: sum / n,
            mean_abs: sum_abs / n,
            max_abs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAggregates {
    pub correlation: Aggregate,
    pub uaci_pct: Aggregate,
    pub npcr_pct: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// Indices whose perturbation is absorbed by rounding, leaving the key
    /// unchanged. They are excluded from `pairs` and `aggregates`.
    pub degenerate_pairs: Vec<usize>,
    pub aggregates: SweepAggregates,
    pub pairs: Vec<PairMetrics>,
}

/// Compares the base trajectory with trajectories of `base + k*delta`,
/// `k = 1..=pairs`, reporting correlation, UACI and NPCR per pair.
pub fn correlation_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if config.pairs == 0 {
        return Err(Error::CountTooSmall {
            what: "pairs",
            min: 1,
            got: 0,
        });
    }
    if config.len < 2 {
        return Err(Error::CountTooSmall {
            what: "sequence length",
            min: 2,
            got: config.len,
        });
    }
    let base_value = config.vary.base_value(&config.base);
    let keys = (1..=config.pairs)
        .map(|k| {
            config
                .vary
                .perturb(&config.base, k, config.delta)
                .map(|key| (k, key))
        })
        .collect::<Result<Vec<_>>>()?;
    let (degenerate, live): (Vec<_>, Vec<_>) = keys
        .into_iter()
        .partition(|(_, key)| config.vary.base_value(key) == base_value);
    if live.is_empty() {
        return Err(Error::DegeneratePerturbation {
            delta: config.delta,
        });
    }

    let reference = orbit(&config.base, config.len, config.burn_in);
    let pairs = live
        .par_iter()
        .map(|(k, key)| {
            let other = orbit(key, config.len, config.burn_in);
            let d = differential(&reference, &other)?;
            Ok(PairMetrics {
                index: *k,
                perturbed_value: config.vary.base_value(key),
                correlation: pearson_correlation(&reference, &other)?,
                uaci_pct: d.uaci_pct,
                npcr_pct: d.npcr_pct,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let aggregates = SweepAggregates {
        correlation: Aggregate::of(pairs.iter().map(|p| p.correlation)),
        uaci_pct: Aggregate::of(pairs.iter().map(|p| p.uaci_pct)),
        npcr_pct: Aggregate::of(pairs.iter().map(|p| p.npcr_pct)),
    };
    Ok(SweepResult {
        config: config.clone(),
        degenerate_pairs: degenerate.into_iter().map(|(k, _)| k).collect(),
        aggregates,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramReport {
    pub counts: Vec<u64>,
    pub chi_square: f64,
    pub p_value: f64,
}

/// Bin counts of `bytes` over `bins` equal-width cells of `0..=255`, with a
/// chi-square goodness-of-fit test against the uniform distribution.
pub fn histogram_uniformity(bytes: &[u8], bins: usize) -> Result<HistogramReport> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(2..=256).contains(&bins) {
        return Err(Error::InvalidTestParameter {
            test: "histogram",
            reason: format!("bins must be in 2..=256, got {bins}"),
        });
    }
    if bytes.len() < bins {
        return Err(Error::CountTooSmall {
            what: "sample count",
            min: bins,
            got: bytes.len(),
        });
    }
    let mut counts = vec![0u64; bins];
    for &b in bytes {
        counts[b as usize * bins / 256] += 1;
    }
    let (chi_square, p_value) = chi_square_uniform(&counts);
    Ok(HistogramReport {
        counts,
        chi_square,
        p_value,
    })
}

pub const DEFAULT_ENTROPY_SEQUENCES: usize = 100;
pub const DEFAULT_ENTROPY_LEN: usize = 100_000;
/// Spacing between the seeds of successive sequences in an entropy sweep.
pub const DEFAULT_SEED_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySweep {
    pub base: MapKey,
    pub seed_step: f64,
    pub len: usize,
    pub entropies: Vec<f64>,
    pub mean_entropy: f64,
}

/// Mean 8-bit entropy of `sequences` trajectories seeded at
/// `x0 + k*seed_step`, `k = 0..sequences`.
pub fn entropy_sweep(
    base: &MapKey,
    sequences: usize,
    len: usize,
    seed_step: f64,
) -> Result<EntropySweep> {
    if sequences == 0 || len == 0 {
        return Err(Error::CountTooSmall {
            what: "sequences and length",
            min: 1,
            got: 0,
        });
    }
    let keys = (0..sequences)
        .map(|k| Vary::X0.perturb(base, k, seed_step))
        .collect::<Result<Vec<_>>>()?;
    let entropies: Vec<f64> = keys
        .par_iter()
        .map(|key| byte_entropy(&quantize_bytes(&orbit(key, len, 0))))
        .collect();
    let mean_entropy = entropies.iter().sum::<f64>() / entropies.len() as f64;
    Ok(EntropySweep {
        base: *base,
        seed_step,
        len,
        entropies,
        mean_entropy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentCounts {
    pub x0: f64,
    pub mu: f64,
    pub n1: f64,
    pub n2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeySpaceReport {
    pub precision_exponent: i32,
    pub component_counts: ComponentCounts,
    pub total_bits: f64,
    /// Bits left after discarding half of all keys as potentially weak.
    pub weak_key_adjusted_bits: f64,
}

/// Counts distinguishable keys when parameters resolve to `10^precision`.
///
/// `x0` spans one unit, `mu` spans the 98 units of `(2, 100)`, and each region
/// bound is resolved three decades more coarsely than the seed.
pub fn keyspace_report(precision_exponent: i32) -> Result<KeySpaceReport> {
    if precision_exponent >= 0 {
        return Err(Error::InvalidPrecision(precision_exponent));
    }
    let resolution = 10f64.powi(-precision_exponent);
    let counts = ComponentCounts {
        x0: resolution,
        mu: (super::map::MU_MAX - super::map::MU_MIN) * resolution,
        n1: (resolution / 1e3).max(1.0),
        n2: (resolution / 1e3).max(1.0),
    };
    let total_bits = counts.x0.log2() + counts.mu.log2() + counts.n1.log2() + counts.n2.log2();
    Ok(KeySpaceReport {
        precision_exponent,
        component_counts: counts,
        total_bits,
        weak_key_adjusted_bits: total_bits - 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityCase {
    VaryMu,
    VaryX0,
}

impl SensitivityCase {
    fn vary(self) -> Vary {
        match self {
            SensitivityCase::VaryMu => Vary::Mu,
            SensitivityCase::VaryX0 => Vary::X0,
        }
    }
}

pub const SENSITIVITY_PLOT_PREFIX: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityTrace {
    pub parameter: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePair {
    pub a: usize,
    pub b: usize,
    pub correlation: f64,
    /// Both traces come from the same key after rounding.
    pub identical_keys: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRun {
    pub case: SensitivityCase,
    pub base: MapKey,
    pub delta: f64,
    /// Leading values of each trace intended for plotting.
    pub plot_prefix: usize,
    pub traces: Vec<SensitivityTrace>,
    pub correlations: Vec<TracePair>,
}

/// Generates `sequences` trajectories at `base + k*delta` (`k = 0..sequences`)
/// and correlates every pair.
pub fn key_sensitivity_run(
    case: SensitivityCase,
    base: &MapKey,
    delta: f64,
    sequences: usize,
    len: usize,
) -> Result<SensitivityRun> {
    if sequences < 2 {
        return Err(Error::CountTooSmall {
            what: "sequences",
            min: 2,
            got: sequences,
        });
    }
    let vary = case.vary();
    let keys = (0..sequences)
        .map(|k| vary.perturb(base, k, delta))
        .collect::<Result<Vec<_>>>()?;
    let traces: Vec<SensitivityTrace> = keys
        .iter()
        .map(|key| SensitivityTrace {
            parameter: vary.base_value(key),
            values: orbit(key, len, 0),
        })
        .collect();
    let mut correlations = Vec::new();
    for a in 0..traces.len() {
        for b in a + 1..traces.len() {
            correlations.push(TracePair {
                a,
                b,
                correlation: pearson_correlation(&traces[a].values, &traces[b].values)?,
                identical_keys: keys[a] == keys[b],
            });
        }
    }
    Ok(SensitivityRun {
        case,
        base: *base,
        delta,
        plot_prefix: SENSITIVITY_PLOT_PREFIX.min(len),
        traces,
        correlations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        assert_abs_diff_eq!(pearson_correlation(&x, &x).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pearson_correlation(&x, &y).unwrap(), -1.0, epsilon = 1e-12);
        assert_eq!(
            pearson_correlation(&x, &y[..10]),
            Err(Error::LengthMismatch(50, 10))
        );
        assert_eq!(
            pearson_correlation(&x, &vec![0.3; 50]),
            Err(Error::ZeroVariance)
        );
    }

    #[test]
    fn pearson_matches_raw_sum_form() {
        let key = MapKey::new(7.31, 0.2).unwrap();
        let x = orbit(&key, 500, 0);
        let y = orbit(&key, 500, 500);
        let l = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        let raw = (l * sxy - sx * sy) / ((l * sxx - sx * sx) * (l * syy - sy * sy)).sqrt();
        assert_abs_diff_eq!(pearson_correlation(&x, &y).unwrap(), raw, epsilon = 1e-10);
    }

    #[test]
    fn differential_examples() {
        let t = [0.1, 0.5, 0.9];
        assert_eq!(
            differential(&t, &t).unwrap(),
            Differential {
                uaci_pct: 0.0,
                npcr_pct: 0.0
            }
        );
        assert_eq!(
            differential(&[0.0], &[1.0]).unwrap(),
            Differential {
                uaci_pct: 100.0,
                npcr_pct: 100.0
            }
        );
        // Same 8-bit cell: UACI sees the difference, NPCR does not.
        let d = differential(&[0.5], &[0.501]).unwrap();
        assert_abs_diff_eq!(d.uaci_pct, 0.1, epsilon = 1e-9);
        assert_eq!(d.npcr_pct, 0.0);
        assert!(differential(&[0.1], &[0.1, 0.2]).is_err());
        assert!(differential(&[], &[]).is_err());
    }

    #[test]
    fn zero_delta_is_degenerate() {
        let config = SweepConfig {
            base: MapKey::new(61.81, 0.23).unwrap(),
            vary: Vary::X0,
            delta: 0.0,
            pairs: 5,
            len: 100,
            burn_in: 0,
        };
        assert_eq!(
            correlation_sweep(&config),
            Err(Error::DegeneratePerturbation { delta: 0.0 })
        );
    }

    #[test]
    fn rounding_absorbed_perturbations_are_flagged() {
        // The spacing of binary64 values near 61.81 is 2^-47, so adding 2^-48
        // once rounds back to the base value.
        let config = SweepConfig {
            base: MapKey::new(61.81, 0.23).unwrap(),
            vary: Vary::Mu,
            delta: 2f64.powi(-48),
            pairs: 4,
            len: 1000,
            burn_in: 0,
        };
        let r = correlation_sweep(&config).unwrap();
        assert_eq!(r.degenerate_pairs, vec![1]);
        assert_eq!(r.pairs.len(), 3);
        assert!(r.pairs.iter().all(|p| p.correlation.abs() < 0.2));
    }

    #[test]
    fn sweep_out_of_range_is_an_error() {
        let config = SweepConfig {
            base: MapKey::new(99.9, 0.23).unwrap(),
            vary: Vary::Mu,
            delta: 0.05,
            pairs: 3,
            len: 100,
            burn_in: 0,
        };
        assert!(matches!(
            correlation_sweep(&config),
            Err(Error::PerturbationOutOfRange(_))
        ));
    }

    #[test]
    fn histogram_examples() {
        let uniform: Vec<u8> = (0..=255u8).cycle().take(256 * 10).collect();
        let h = histogram_uniformity(&uniform, 256).unwrap();
        assert_eq!(h.chi_square, 0.0);
        assert_eq!(h.p_value, 1.0);
        assert!(h.counts.iter().all(|&c| c == 10));

        let h = histogram_uniformity(&[7u8; 5000], 256).unwrap();
        assert!(h.p_value < 1e-100);

        let h = histogram_uniformity(&uniform, 16).unwrap();
        assert_eq!(h.counts, vec![160; 16]);

        assert_eq!(histogram_uniformity(&[], 256), Err(Error::EmptyInput));
        assert!(histogram_uniformity(&[1, 2, 3], 256).is_err());
    }

    #[test]
    fn entropy_sweep_edge_cases() {
        // mu = 2.75 from 1/2 collapses onto the fixed point 0 within two steps.
        let stuck = MapKey::new(2.75, 0.5).unwrap();
        let r = entropy_sweep(&stuck, 1, 100_000, DEFAULT_SEED_STEP).unwrap();
        assert!(r.mean_entropy < 0.001, "{}", r.mean_entropy);

        let exact: Vec<u8> = (0..=255u8).collect();
        assert_abs_diff_eq!(byte_entropy(&exact), 8.0, epsilon = 1e-12);

        let base = MapKey::new(61.81, 0.23).unwrap();
        let r = entropy_sweep(&base, 3, 10_000, DEFAULT_SEED_STEP).unwrap();
        assert_eq!(r.entropies.len(), 3);
        assert!(entropy_sweep(
            &MapKey::new(61.81, 0.9).unwrap(),
            200,
            10,
            DEFAULT_SEED_STEP
        )
        .is_err());
    }

    #[test]
    fn keyspace_examples() {
        let r = keyspace_report(-16).unwrap();
        assert_eq!(r.component_counts.x0, 1e16);
        assert_eq!(r.component_counts.n1, 1e13);
        assert_eq!(r.total_bits.floor(), 199.0);
        assert_eq!(r.weak_key_adjusted_bits.floor(), 198.0);
        assert!(r.weak_key_adjusted_bits >= 100.0);

        let small = keyspace_report(-8).unwrap();
        let expected = 8.0 * 10f64.log2() + (98e8f64).log2() + 2.0 * 5.0 * 10f64.log2();
        assert_abs_diff_eq!(small.total_bits, expected, epsilon = 1e-9);
        assert_eq!(small.weak_key_adjusted_bits, small.total_bits - 1.0);
        assert_eq!(keyspace_report(0), Err(Error::InvalidPrecision(0)));
    }

    #[test]
    fn sensitivity_with_zero_delta_is_perfectly_correlated() {
        let base = MapKey::new(49.13, 0.28).unwrap();
        let r = key_sensitivity_run(SensitivityCase::VaryX0, &base, 0.0, 3, 500).unwrap();
        assert_eq!(r.correlations.len(), 3);
        assert!(r
            .correlations
            .iter()
            .all(|p| p.correlation == 1.0 && p.identical_keys));
        assert_eq!(r.plot_prefix, 30);
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            seed in 0.01f64..0.99,
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let a = orbit(&MapKey::new(13.37, seed).unwrap(), 200, 0);
            let b = orbit(&MapKey::new(29.71, seed).unwrap(), 200, 0);
            let r = pearson_correlation(&a, &b).unwrap();
            prop_assert!((r - pearson_correlation(&b, &a).unwrap()).abs() < 1e-12);
            let scaled: Vec<f64> = a.iter().map(|v| scale * v + shift).collect();
            prop_assert!((r - pearson_correlation(&scaled, &b).unwrap()).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}
