mod common;

use common::network_spec;
use multisteer::oracle::{sample, verify_state, SampleBatch};
use multisteer::{build, chain_preset};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oracle_agrees_with_analytic_inference(spec in network_spec(), seed in any::<u64>()) {
        let built = build(&spec).unwrap();
        prop_assume!(built.active_modes.len() >= 2);
        let report = verify_state(&built.state, &built.active_modes, 200_000, seed).unwrap();
        prop_assert!(report.passes(4.0), "max deviation {} sigma", report.max_deviation_sigma);
    }
}

#[test]
fn batches_are_reproducible_and_round_trip() {
    let built = build(&chain_preset(3).unwrap()).unwrap();
    let a = sample(&built.state, 20_000, 42).unwrap();
    let b = sample(&built.state, 20_000, 42).unwrap();
    assert_eq!(a, b);
    let mut bytes = Vec::new();
    a.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 16 + 8 * 20_000 * 16);
    assert_eq!(&bytes[..4], b"GSMB");
    let back = SampleBatch::read_binary(bytes.as_slice()).unwrap();
    assert_eq!(back.data(), a.data());
    assert_eq!(back.n_samples, a.n_samples);
}
