#![allow(dead_code)]

use multisteer::network::{BeamSplitter, Fraction, InputMode, LossChannel, Percent, CHAIN};
use multisteer::{GaussianState, NetworkSpec, Quadrature};
use proptest::prelude::*;

pub fn quadrature() -> impl Strategy<Value = Quadrature> {
    prop_oneof![Just(Quadrature::X), Just(Quadrature::P)]
}

/// A physical (possibly mixed) squeezed input.
pub fn squeezed_input() -> impl Strategy<Value = InputMode> {
    (0.5f64..8.0, 0.0f64..4.0, quadrature()).prop_map(|(sq, excess, axis)| InputMode::Squeezed {
        var_sq_db: -sq,
        var_anti_db: sq + excess,
        squeezed_axis: axis,
    })
}

/// A chain network with `1..=7` splitters at random reflectivities, random
/// squeezed inputs on rails 1 and 2 and optional losses and efficiencies.
pub fn network_spec() -> impl Strategy<Value = NetworkSpec> {
    (
        squeezed_input(),
        squeezed_input(),
        1usize..=7,
        prop::collection::vec(1.0f64..99.0, 7),
        prop::option::of(prop::collection::vec(0.85f64..=1.0, 8)),
        prop::option::of((1usize..=2, 0.0f64..=1.0)),
    )
        .prop_map(|(a, b, n_split, refl, eff, loss)| {
            let mut inputs = vec![a, b];
            inputs.extend(std::iter::repeat_n(InputMode::Vacuum, 6));
            let beamsplitters = CHAIN[..n_split]
                .iter()
                .zip(&refl)
                .map(|(&(name, pair), &r)| BeamSplitter {
                    name: name.to_string(),
                    mode_pair: pair,
                    reflectivity_percent: Percent::new(r).unwrap(),
                })
                .collect();
            let losses = loss
                .map(|(mode, t)| {
                    vec![LossChannel {
                        mode,
                        transmission: Fraction::new(t).unwrap(),
                        after: Some("VBS_12".into()),
                    }]
                })
                .unwrap_or_default();
            NetworkSpec {
                inputs,
                beamsplitters,
                losses,
                efficiencies: eff.map(|e| e.into_iter().map(|v| Fraction::new(v).unwrap()).collect()),
                active_modes: None,
                loss_arm: None,
            }
        })
}

/// Tensor product of random squeezed inputs and vacua mixed by random splitters.
pub fn mixed_state(n_modes: usize) -> impl Strategy<Value = GaussianState> {
    (
        prop::collection::vec(prop::option::of(squeezed_input()), n_modes),
        prop::collection::vec((0..n_modes, 0..n_modes, 0.0f64..=1.0), 0..12),
    )
        .prop_map(move |(inputs, splitters)| {
            let mut state: Option<GaussianState> = None;
            for input in inputs {
                let mode = input.unwrap_or(InputMode::Vacuum).state().unwrap();
                state = Some(match state {
                    None => mode,
                    Some(s) => s.tensor(&mode),
                });
            }
            let mut state = state.unwrap();
            for (i, j, r) in splitters {
                if i != j {
                    state = state.apply_beamsplitter(i, j, r).unwrap();
                }
            }
            state
        })
}

pub fn max_abs_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    (a.covariance() - b.covariance()).abs().max()
}
