mod common;

use common::{network_spec, squeezed_input};
use multisteer::network::{symmetric_pure_inputs, InputMode};
use multisteer::optimize::{grid, optimize_reflectivity, sweep, Objective, OptimizeOptions, SweepParameter};
use multisteer::{build, chain_preset, collective_steering_report, steering_product, NetworkSpec};
use proptest::prelude::*;

fn mirrors_only(a: InputMode, b: InputMode) -> NetworkSpec {
    let mut spec = chain_preset(8).unwrap();
    for bs in &mut spec.beamsplitters {
        bs.reflectivity_percent = multisteer::network::Percent::new(100.0).unwrap();
    }
    let mut inputs = vec![a, b];
    inputs.extend(std::iter::repeat_n(InputMode::Vacuum, 6));
    spec.with_inputs(inputs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(spec in network_spec()) {
        let text = spec.to_json_pretty().unwrap();
        let back = NetworkSpec::from_json_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn build_is_deterministic(spec in network_spec()) {
        let a = build(&spec).unwrap();
        let b = build(&spec).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lossless_networks_preserve_trace(spec in network_spec()) {
        let mut spec = spec;
        spec.losses.clear();
        spec.efficiencies = None;
        let built = build(&spec).unwrap();
        let input_trace: f64 = spec.inputs.iter().map(|i| i.state().unwrap().covariance().trace()).sum();
        prop_assert!((built.state.covariance().trace() - input_trace).abs() < 1e-9);
    }

    #[test]
    fn mirrors_are_transparent(a in squeezed_input(), b in squeezed_input()) {
        let spec = mirrors_only(a.clone(), b.clone());
        let built = build(&spec).unwrap();
        prop_assert_eq!(&built.active_modes, &vec![0, 1]);
        for (mode, input) in [a, b].iter().enumerate() {
            let s = steering_product(&built.state, mode, &[1 - mode]).unwrap();
            let single = input.state().unwrap();
            let expected = single.variance(0, multisteer::Quadrature::X) * single.variance(0, multisteer::Quadrature::P);
            prop_assert!((s.steering_number - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn symmetric_inputs_give_symmetric_objectives(r in 0.0f64..=1.0, n in 3usize..=8) {
        let spec = chain_preset(n).unwrap().with_inputs(symmetric_pure_inputs(6.0));
        for objective in [Objective::MaxSteering, Objective::MeanSteering, Objective::Tripartite] {
            let f = |v: f64| objective.evaluate(&spec.with_reflectivity("VBS_12", 100.0 * v).unwrap()).unwrap();
            prop_assert!((f(r) - f(1.0 - r)).abs() < 1e-10, "{objective} at {r}");
        }
    }
}

#[test]
fn grid_refinement_is_consistent() {
    let spec = chain_preset(3).unwrap();
    let param = SweepParameter::parse(&spec, "VBS_31").unwrap();
    let coarse = sweep(&spec, &param, 0.0, 1.0, 11).unwrap();
    let fine = sweep(&spec, &param, 0.0, 1.0, 21).unwrap();
    for (k, row) in coarse.rows.iter().enumerate() {
        let twin = &fine.rows[2 * k];
        assert_eq!(row.parameter, twin.parameter);
        assert_eq!(row, twin);
    }
    assert_eq!(grid(0.0, 1.0, 21)[10], 0.5);
}

#[test]
fn finer_coarse_grid_moves_optimum_within_tolerance() {
    for n in [3, 5] {
        let spec = chain_preset(n).unwrap();
        let base = optimize_reflectivity(&spec, "VBS_12", Objective::MeanSteering, OptimizeOptions::default()).unwrap();
        let finer = optimize_reflectivity(
            &spec,
            "VBS_12",
            Objective::MeanSteering,
            OptimizeOptions {
                coarse_points: 401,
                ..OptimizeOptions::default()
            },
        )
        .unwrap();
        assert!(
            (base.r_star - finer.r_star).abs() < OptimizeOptions::default().tolerance,
            "n={n}: {} vs {}",
            base.r_star,
            finer.r_star
        );
    }
}

#[test]
fn all_vacuum_network_has_no_steering() {
    let mut spec = chain_preset(8).unwrap();
    spec.inputs = vec![InputMode::Vacuum; 8];
    spec.active_modes = Some((1..=8).collect());
    let built = build(&spec).unwrap();
    let report = collective_steering_report(&built.state, &built.active_modes).unwrap();
    assert_eq!(report.regime_count, 0);
    for e in &report.entries {
        assert!((e.s - 1.0).abs() < 1e-12);
    }
}
