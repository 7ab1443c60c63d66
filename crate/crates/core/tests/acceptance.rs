//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use rctm::dynamics::{lyapunov, midpoint_grid, phase_coverage};
use rctm::ent::ent_battery;
use rctm::nist::{ks_uniform_statistic, nist_battery, nist_test, NistParams, NistTest};
use rctm::security::{
    correlation_sweep, entropy_sweep, histogram_uniformity, keyspace_report, SweepConfig, Vary,
    DEFAULT_SEED_STEP,
};
use rctm::{
    generate_bits, iterate, make_key, pack_bytes, quantize_bytes, rctm_step, unpack_bytes,
    BitStream, MapKey, TentMap,
};

const MU: f64 = 61.81;
const X0: f64 = 0.23;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn reference_key() -> MapKey {
    make_key(MU, X0).expect("reference key is valid")
}

fn nist_subset() -> Outcome {
    const STREAMS: usize = 20;
    const BITS: usize = 1_000_000;
    let start = Instant::now();
    let all = generate_bits(&reference_key(), STREAMS * BITS, 0).unwrap();
    let streams = all.segments(BITS);
    let report = nist_battery(&streams, &NistParams::default()).unwrap();
    let elapsed = start.elapsed();

    let mut ok = elapsed <= Duration::from_secs(300);
    let mut parts = Vec::new();
    for s in &report.summary {
        ok &= s.passed >= 19;
        parts.push(format!("{}={}/{}", s.test, s.passed, s.total));
    }
    outcome(
        ok,
        format!("{} in {:.1}s", parts.join(" "), elapsed.as_secs_f64()),
    )
}

fn ent() -> Outcome {
    let bits = generate_bits(&reference_key(), 8 * 1_000_000, 0).unwrap();
    let bytes = pack_bytes(&bits).bytes;
    let r = ent_battery(&bytes).unwrap();
    let serial = r.serial_correlation.unwrap_or(f64::NAN);
    let ok = r.entropy_bits_per_byte >= 7.999
        && (r.arithmetic_mean - 127.5).abs() <= 0.3
        && serial.abs() <= 0.005
        && r.monte_carlo_error_pct <= 0.5
        && (1.0..=99.0).contains(&r.chi_square_exceed_pct);
    outcome(
        ok,
        format!(
            "entropy={:.6} mean={:.4} serial={:.6} pi_err={:.3}% chi2={:.2} ({:.2}%)",
            r.entropy_bits_per_byte,
            r.arithmetic_mean,
            serial,
            r.monte_carlo_error_pct,
            r.chi_square,
            r.chi_square_exceed_pct
        ),
    )
}

fn lyapunov_exponents() -> Outcome {
    let mut ok = true;
    let mut worst_classic = 0.0f64;
    for mu in [1.1, 1.5, 1.9, 2.0] {
        let est = lyapunov(&TentMap::new(mu, 0.123_456_7).unwrap(), 100_000, 0).unwrap();
        let err = (est.lambda - f64::ln(mu)).abs();
        worst_classic = worst_classic.max(err);
        ok &= err <= 0.01;
    }
    let grid = midpoint_grid(2.0, 100.0, 100);
    let mut min_robust = f64::INFINITY;
    for &mu in &grid {
        let est = lyapunov(&make_key(mu, X0).unwrap(), 100_000, 0).unwrap();
        min_robust = min_robust.min(est.lambda);
        ok &= est.lambda > 0.0;
    }
    ok &= grid.len() == 100;
    outcome(
        ok,
        format!("classic max |lambda - ln mu| = {worst_classic:.2e}; robust min lambda over 100 points = {min_robust:.4}"),
    )
}

fn ergodicity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [3.13, 8.4, 20.33, 70.23] {
        let c = phase_coverage(&make_key(mu, X0).unwrap(), 100_000, 1000).unwrap();
        ok &= c >= 0.99;
        parts.push(format!("mu={mu}: {c:.3}"));
    }
    outcome(ok, parts.join(", "))
}

fn differential_analysis() -> Outcome {
    let config = SweepConfig {
        base: make_key(93.23, X0).unwrap(),
        vary: Vary::X0,
        delta: 2f64.powi(-52),
        pairs: 100,
        len: 10_000,
        burn_in: 0,
    };
    let r = correlation_sweep(&config).unwrap();
    let uaci = r.aggregates.uaci_pct.mean;
    let npcr = r.aggregates.npcr_pct.mean;
    let ok = r.pairs.len() == 100 && (uaci - 33.33).abs() <= 0.5 && (npcr - 99.61).abs() <= 0.2;
    outcome(
        ok,
        format!(
            "pairs={} mean UACI={uaci:.4}% mean NPCR={npcr:.4}%",
            r.pairs.len()
        ),
    )
}

fn correlation() -> Outcome {
    let config = SweepConfig {
        base: reference_key(),
        vary: Vary::X0,
        delta: 2f64.powi(-48),
        pairs: 1000,
        len: 1000,
        burn_in: 0,
    };
    let r = correlation_sweep(&config).unwrap();
    let c = r.aggregates.correlation;
    let ok = r.pairs.len() == 1000 && c.max_abs <= 0.15 && c.mean_abs <= 0.05;
    outcome(
        ok,
        format!(
            "pairs={} min={:.4} max={:.4} max|r|={:.4} mean|r|={:.4}",
            r.pairs.len(),
            c.min,
            c.max,
            c.max_abs,
            c.mean_abs
        ),
    )
}

fn histogram() -> Outcome {
    let t = iterate(&reference_key(), 100_000, 0).unwrap();
    let h = histogram_uniformity(&quantize_bytes(t.values()), 256).unwrap();
    outcome(
        h.p_value >= 0.01,
        format!("chi2={:.2} p={:.4}", h.chi_square, h.p_value),
    )
}

fn entropy() -> Outcome {
    let r = entropy_sweep(&reference_key(), 100, 100_000, DEFAULT_SEED_STEP).unwrap();
    let lo = r.entropies.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        r.entropies.len() == 100 && r.mean_entropy >= 7.99,
        format!("mean={:.5} min={:.5}", r.mean_entropy, lo),
    )
}

fn key_space() -> Outcome {
    let r = keyspace_report(-16).unwrap();
    let ok = r.total_bits.floor() == 199.0
        && r.weak_key_adjusted_bits.floor() == 198.0
        && r.weak_key_adjusted_bits == r.total_bits - 1.0;
    outcome(
        ok,
        format!(
            "total={:.3} bits adjusted={:.3} bits",
            r.total_bits, r.weak_key_adjusted_bits
        ),
    )
}

fn determinism_and_sensitivity() -> Outcome {
    const BITS: usize = 1_000_000;
    let key = reference_key();
    let a = generate_bits(&key, BITS, 0).unwrap();
    let b = generate_bits(&key, BITS, 0).unwrap();
    let identical = a == b;
    let other = generate_bits(&key.with_x0(X0 + 2f64.powi(-48)).unwrap(), BITS, 0).unwrap();
    let distance = a
        .bits()
        .iter()
        .zip(other.bits())
        .filter(|(x, y)| x != y)
        .count() as f64
        / BITS as f64;
    outcome(
        identical && (distance - 0.5).abs() <= 0.01,
        format!("identical={identical} hamming fraction={distance:.5}"),
    )
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 512,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn property_suites() -> Outcome {
    let valid_mu =
        (2.0f64..100.0).prop_filter("non-integer above 2", |m| *m > 2.0 && m.fract() != 0.0);
    let mut failures = Vec::new();

    let results = [
        run_property(
            "range closure",
            (valid_mu.clone(), 0.0f64..=1.0),
            |(mu, x)| {
                let y = rctm_step(x, &MapKey::new(mu, 0.5).unwrap()).unwrap();
                prop_assert!((0.0..=1.0).contains(&y));
                Ok(())
            },
        ),
        run_property("n1 + n2 = 1", valid_mu.clone(), |mu| {
            let k = MapKey::new(mu, 0.5).unwrap();
            prop_assert!((k.n1() + k.n2() - 1.0).abs() <= f64::EPSILON);
            Ok(())
        }),
        run_property("branch ties", valid_mu, |mu| {
            let k = MapKey::new(mu, 0.5).unwrap();
            prop_assert!(k.is_internal(k.n1()) && k.is_internal(k.n2()) && k.is_internal(0.5));
            // x = 1/2 takes the reflected internal sub-branch, whose residue
            // there equals the scale exactly.
            prop_assert_eq!(rctm_step(0.5, &k).unwrap(), 1.0);
            Ok(())
        }),
        run_property(
            "pack/unpack round trip",
            proptest::collection::vec(0u8..=1, 0..512),
            |bits| {
                let stream = BitStream::from_bits(bits.clone());
                let packed = pack_bytes(&stream);
                let unpacked = unpack_bytes(&packed.bytes, bits.len());
                prop_assert_eq!(unpacked.bits(), &bits[..]);
                Ok(())
            },
        ),
    ];
    for r in results {
        if let Err(e) = r {
            failures.push(e);
        }
    }

    // Monobit p-values of 200 independently seeded streams against U(0,1).
    let p_values: Vec<f64> = (0..200)
        .map(|k| {
            let key = make_key(MU, 0.1 + 0.004 * k as f64).unwrap();
            let bits = generate_bits(&key, 100_000, 0).unwrap();
            nist_test(NistTest::Monobit, &bits, &NistParams::default())
                .unwrap()
                .p_value()
        })
        .collect();
    let ks = ks_uniform_statistic(&p_values);
    let critical = 1.628 / (p_values.len() as f64).sqrt();
    if ks > critical {
        failures.push(format!("p-value uniformity: KS {ks:.4} > {critical:.4}"));
    }

    let detail = if failures.is_empty() {
        format!("4 properties x 512 cases; monobit KS={ks:.4} (critical {critical:.4})")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 NIST subset battery", nist_subset),
        ("2 ENT battery", ent),
        ("3 Lyapunov exponents", lyapunov_exponents),
        ("4 Ergodicity", ergodicity),
        ("5 Differential UACI/NPCR", differential_analysis),
        ("6 Correlation", correlation),
        ("7 Histogram", histogram),
        ("8 Entropy sweep", entropy),
        ("9 Key space", key_space),
        (
            "10 Determinism and sensitivity",
            determinism_and_sensitivity,
        ),
        ("11 Property suites", property_suites),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();

    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let r = run();
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {name}: {} [{:.1}s]",
            r.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!r.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
