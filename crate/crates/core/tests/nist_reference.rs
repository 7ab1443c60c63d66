//! Reference values for the first 10^6 binary digits of e, plus battery-level
//! behaviour on structured input.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use rctm::nist::{min_pass_proportion, nist_battery, nist_test, NistParams, NistTest};
use rctm::{generate_bits, make_key, unpack_bytes, BitStream};

const E_BYTES: &[u8] = include_bytes!("data/e_1e6.bin");

fn e_bits() -> BitStream {
    unpack_bytes(E_BYTES, 1_000_000)
}

fn p_values(test: NistTest, params: &NistParams) -> Vec<f64> {
    nist_test(test, &e_bits(), params).unwrap().p_values
}

#[test]
fn e_expansion_reference_p_values() {
    let params = NistParams::default();
    let cases = [
        (NistTest::Monobit, vec![0.953749]),
        (NistTest::Runs, vec![0.561917]),
        (NistTest::LongestRun, vec![0.718945]),
        (NistTest::CusumForward, vec![0.669886]),
        (NistTest::CusumReverse, vec![0.724265]),
        (NistTest::Dft, vec![0.847187]),
        (NistTest::Serial, vec![0.843764, 0.561915]),
        (NistTest::ApproximateEntropy, vec![0.695109]),
    ];
    for (test, expected) in cases {
        let got = p_values(test, &params);
        assert_eq!(got.len(), expected.len(), "{test}");
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(*g, *e, epsilon = 1e-6);
        }
    }
}

#[test]
fn e_expansion_parameterized_tests() {
    let block = NistParams {
        block_frequency_m: 128,
        ..NistParams::default()
    };
    assert_abs_diff_eq!(
        p_values(NistTest::BlockFrequency, &block)[0],
        0.211072,
        epsilon = 1e-6
    );

    let apen = NistParams {
        approximate_entropy_m: 10,
        ..NistParams::default()
    };
    assert_abs_diff_eq!(
        p_values(NistTest::ApproximateEntropy, &apen)[0],
        0.700073,
        epsilon = 1e-6
    );
}

#[test]
fn e_expansion_battery_summary() {
    // Ten 10^5-bit segments; pass counts are frozen from a reference run.
    let streams = e_bits().segments(100_000);
    let report = nist_battery(&streams, &NistParams::default()).unwrap();
    assert_eq!(report.stream_meta.streams, 10);
    let passed: Vec<usize> = report.summary.iter().map(|s| s.passed).collect();
    assert_eq!(passed, vec![9, 10, 10, 9, 9, 9, 10, 9, 8]);
    assert!(!report.summary_for(NistTest::Dft).unwrap().ok);
    assert!(!report.all_ok());
}

#[test]
fn alternating_pattern_fails_runs_and_serial() {
    // Period-2 counter with a random-looking prefix per stream.
    let streams: Vec<BitStream> = (0..20)
        .map(|k| {
            let prefix =
                generate_bits(&make_key(61.81, 0.1 + 0.01 * k as f64).unwrap(), 64, 0).unwrap();
            BitStream::from_bits(
                prefix
                    .bits()
                    .iter()
                    .copied()
                    .chain((0..100_000).map(|i| (i % 2) as u8)),
            )
        })
        .collect();
    let report = nist_battery(&streams, &NistParams::default()).unwrap();
    assert!(!report.all_ok());
    for test in [NistTest::Runs, NistTest::Serial] {
        let s = report.summary_for(test).unwrap();
        assert!(!s.ok, "{test} unexpectedly ok: {s:?}");
        assert!(s.proportion < s.min_proportion);
    }
}

#[test]
fn battery_is_deterministic() {
    let key = make_key(61.81, 0.23).unwrap();
    let streams = generate_bits(&key, 200_000, 0).unwrap().segments(20_000);
    let a = nist_battery(&streams, &NistParams::default()).unwrap();
    let b = nist_battery(&streams, &NistParams::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.entries.len(), 10 * NistTest::ALL.len());
    assert_abs_diff_eq!(min_pass_proportion(20), 0.92325, epsilon = 1e-5);
}

#[test]
fn short_streams_are_rejected() {
    let s = BitStream::from_bits(vec![1u8; 99]);
    assert!(nist_test(NistTest::Monobit, &s, &NistParams::default()).is_err());
    let s = BitStream::from_bits(vec![1u8; 999]);
    assert!(nist_test(NistTest::Dft, &s, &NistParams::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cusum_reverse_is_forward_on_reversed_bits(bits in proptest::collection::vec(0u8..=1, 100..2000)) {
        let s = BitStream::from_bits(bits);
        let params = NistParams::default();
        let rev = nist_test(NistTest::CusumReverse, &s, &params).unwrap();
        let fwd = nist_test(NistTest::CusumForward, &s.reversed(), &params).unwrap();
        prop_assert_eq!(rev, fwd);
    }
}
