//! Declarative linear-optics networks: squeezed and vacuum inputs, a chain of
//! variable beam splitters, loss channels and per-mode detection efficiency.
//!
//! Mode indices in [`NetworkSpec`] are 1-based, as in spec files. Everything
//! returned by [`build`] is 0-based.
//!
//! A beam splitter entry `{ mode_pair: [a, b], reflectivity_percent: R }`
//! applies [`GaussianState::apply_beamsplitter`] to `(a, b)` with the
//! reflected light staying on its own rail: a fraction `R` of the power on
//! rail `a` remains on `a` and `1 - R` crosses to `b`, and vice versa. An
//! `R = 100` entry is therefore a mirror that leaves every rail in place
//! (up to a sign on rail `a`), and `R = 0` exchanges the two rails.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quadrature};

/// Name of the first splitter of the chain, which the asymmetric loss follows.
pub const FIRST_SPLITTER: &str = "VBS_12";

/// Chain splitters in application order, with their (1-based) mode pairs.
pub const CHAIN: [(&str, [usize; 2]); 7] = [
    ("VBS_12", [1, 2]),
    ("VBS_31", [3, 1]),
    ("VBS_24", [2, 4]),
    ("VBS_53", [5, 3]),
    ("VBS_46", [4, 6]),
    ("VBS_75", [7, 5]),
    ("VBS_68", [6, 8]),
];

/// Reflectivities (percent) of the optimised chain for `N = 2..=8`, in
/// [`CHAIN`] order.
pub const OPTIMISED_REFLECTIVITIES: [[f64; 7]; 7] = [
    [50.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0],
    [51.1, 50.0, 100.0, 100.0, 100.0, 100.0, 100.0],
    [50.0, 50.0, 50.0, 100.0, 100.0, 100.0, 100.0],
    [50.8, 33.3, 50.0, 50.0, 100.0, 100.0, 100.0],
    [50.0, 33.3, 33.3, 50.0, 50.0, 100.0, 100.0],
    [50.6, 25.0, 33.3, 33.3, 50.0, 50.0, 100.0],
    [50.0, 25.0, 25.0, 33.3, 33.3, 50.0, 50.0],
];

/// Measured input squeezing, `(squeezed dB, anti-squeezed dB)`.
pub const MEASURED_INPUT_A: (f64, f64) = (-3.6, 8.9);
pub const MEASURED_INPUT_B: (f64, f64) = (-4.1, 9.5);

/// A reflectivity in percent, checked to lie in `[0, 100]` while parsing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Percent(f64);

impl Percent {
    pub fn new(value: f64) -> Result<Self> {
        Self::try_from(value).map_err(|_| Error::OutOfRange {
            name: "reflectivity_percent",
            value,
            range: "[0, 100]",
        })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn fraction(self) -> f64 {
        self.0 / 100.0
    }
}

impl TryFrom<f64> for Percent {
    type Error = String;

    fn try_from(value: f64) -> std::result::Result<Self, String> {
        if (0.0..=100.0).contains(&value) {
            Ok(Percent(value))
        } else {
            Err(format!("reflectivity {value} outside [0, 100] percent"))
        }
    }
}

impl From<Percent> for f64 {
    fn from(p: Percent) -> f64 {
        p.0
    }
}

/// A power fraction in `[0, 1]`, checked while parsing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Fraction(f64);

impl Fraction {
    pub fn new(value: f64) -> Result<Self> {
        Self::try_from(value).map_err(|_| Error::OutOfRange {
            name: "transmission",
            value,
            range: "[0, 1]",
        })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Fraction {
    type Error = String;

    fn try_from(value: f64) -> std::result::Result<Self, String> {
        if (0.0..=1.0).contains(&value) {
            Ok(Fraction(value))
        } else {
            Err(format!("transmission {value} outside [0, 1]"))
        }
    }
}

impl From<Fraction> for f64 {
    fn from(p: Fraction) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputMode {
    Squeezed {
        var_sq_db: f64,
        var_anti_db: f64,
        squeezed_axis: Quadrature,
    },
    Vacuum,
}

impl InputMode {
    pub fn state(&self) -> Result<GaussianState> {
        match *self {
            InputMode::Squeezed {
                var_sq_db,
                var_anti_db,
                squeezed_axis,
            } => GaussianState::squeezed_mode(var_sq_db, var_anti_db, squeezed_axis),
            InputMode::Vacuum => GaussianState::vacuum(1),
        }
    }

    pub fn is_squeezed(&self) -> bool {
        matches!(self, InputMode::Squeezed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSplitter {
    pub name: String,
    pub mode_pair: [usize; 2],
    pub reflectivity_percent: Percent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossChannel {
    pub mode: usize,
    pub transmission: Fraction,
    /// Splitter after which the loss acts; `None` means after the whole chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub inputs: Vec<InputMode>,
    pub beamsplitters: Vec<BeamSplitter>,
    #[serde(default)]
    pub losses: Vec<LossChannel>,
    /// Per-mode detection transmission applied last.
    #[serde(default)]
    pub efficiencies: Option<Vec<Fraction>>,
    /// Modes retained for analysis; derived from the wiring when absent.
    #[serde(default)]
    pub active_modes: Option<Vec<usize>>,
    /// Output arm of the first splitter that receives asymmetric loss (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_arm: Option<usize>,
}

/// One of the optimised chain presets, `n2` through `n8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Preset(usize);

impl Preset {
    pub fn new(n: usize) -> Result<Self> {
        if (2..=8).contains(&n) {
            Ok(Preset(n))
        } else {
            Err(Error::InvalidArgument(format!("preset size {n} outside 2..=8")))
        }
    }

    pub fn n(self) -> usize {
        self.0
    }

    pub fn spec(self) -> NetworkSpec {
        chain_preset(self.0).expect("preset size validated on construction")
    }

    pub fn all() -> impl Iterator<Item = Preset> {
        (2..=8).map(Preset)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.strip_prefix('n').or_else(|| s.strip_prefix('N')).unwrap_or(s);
        let n: usize = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("unknown preset `{s}` (expected n2..n8)")))?;
        Preset::new(n)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// The measured mixed inputs on rails 1 and 2 followed by six vacua.
pub fn measured_inputs() -> Vec<InputMode> {
    let mut inputs = vec![
        InputMode::Squeezed {
            var_sq_db: MEASURED_INPUT_B.0,
            var_anti_db: MEASURED_INPUT_B.1,
            squeezed_axis: Quadrature::P,
        },
        InputMode::Squeezed {
            var_sq_db: MEASURED_INPUT_A.0,
            var_anti_db: MEASURED_INPUT_A.1,
            squeezed_axis: Quadrature::X,
        },
    ];
    inputs.extend(std::iter::repeat_n(InputMode::Vacuum, 6));
    inputs
}

/// Two pure inputs squeezed by `db` on opposite quadratures, then six vacua.
pub fn symmetric_pure_inputs(db: f64) -> Vec<InputMode> {
    let db = db.abs();
    let mut inputs = vec![
        InputMode::Squeezed {
            var_sq_db: -db,
            var_anti_db: db,
            squeezed_axis: Quadrature::P,
        },
        InputMode::Squeezed {
            var_sq_db: -db,
            var_anti_db: db,
            squeezed_axis: Quadrature::X,
        },
    ];
    inputs.extend(std::iter::repeat_n(InputMode::Vacuum, 6));
    inputs
}

/// The eight-rail chain with the optimised reflectivities for `n` modes.
pub fn chain_preset(n: usize) -> Result<NetworkSpec> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!("preset size {n} outside 2..=8")));
    }
    let row = &OPTIMISED_REFLECTIVITIES[n - 2];
    let beamsplitters = CHAIN
        .iter()
        .zip(row)
        .map(|(&(name, mode_pair), &r)| BeamSplitter {
            name: name.to_string(),
            mode_pair,
            reflectivity_percent: Percent(r),
        })
        .collect();
    Ok(NetworkSpec {
        inputs: measured_inputs(),
        beamsplitters,
        losses: Vec::new(),
        efficiencies: None,
        active_modes: None,
        loss_arm: None,
    })
}

fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::InvalidSpec {
        path: path.into(),
        msg: msg.into(),
    }
}

impl NetworkSpec {
    /// Parses and validates a JSON spec. Malformed values are reported with
    /// their line and column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: NetworkSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn n_modes(&self) -> usize {
        self.inputs.len()
    }

    fn check_label(&self, path: String, label: usize) -> Result<()> {
        if label == 0 || label > self.n_modes() {
            return Err(invalid(path, format!("mode {label} outside 1..={}", self.n_modes())));
        }
        Ok(())
    }

    /// Structural checks that span several fields.
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(invalid("inputs", "at least one input mode is required"));
        }
        for (i, input) in self.inputs.iter().enumerate() {
            input.state().map_err(|e| match e {
                Error::Unphysical(msg) => Error::Unphysical(format!("inputs[{i}]: {msg}")),
                other => other,
            })?;
        }
        for (i, bs) in self.beamsplitters.iter().enumerate() {
            let path = format!("beamsplitters[{i}].mode_pair");
            self.check_label(path.clone(), bs.mode_pair[0])?;
            self.check_label(path.clone(), bs.mode_pair[1])?;
            if bs.mode_pair[0] == bs.mode_pair[1] {
                return Err(invalid(path, "mode pair must name two distinct modes"));
            }
            if self.beamsplitters[..i].iter().any(|o| o.name == bs.name) {
                return Err(invalid(
                    format!("beamsplitters[{i}].name"),
                    format!("duplicate splitter name `{}`", bs.name),
                ));
            }
        }
        for (i, loss) in self.losses.iter().enumerate() {
            self.check_label(format!("losses[{i}].mode"), loss.mode)?;
            if let Some(after) = &loss.after {
                if !self.beamsplitters.iter().any(|b| &b.name == after) {
                    return Err(invalid(
                        format!("losses[{i}].after"),
                        format!("no splitter named `{after}`"),
                    ));
                }
            }
        }
        if let Some(eff) = &self.efficiencies {
            if eff.len() != self.n_modes() {
                return Err(invalid(
                    "efficiencies",
                    format!("expected {} entries, got {}", self.n_modes(), eff.len()),
                ));
            }
        }
        if let Some(active) = &self.active_modes {
            if active.len() < 2 {
                return Err(invalid("active_modes", "at least two active modes are required"));
            }
            for (i, &m) in active.iter().enumerate() {
                self.check_label(format!("active_modes[{i}]"), m)?;
                if active[..i].contains(&m) {
                    return Err(invalid(format!("active_modes[{i}]"), format!("mode {m} repeated")));
                }
            }
        }
        if let Some(arm) = self.loss_arm {
            self.check_label("loss_arm".into(), arm)?;
        }
        Ok(())
    }

    pub fn beamsplitter(&self, name: &str) -> Option<&BeamSplitter> {
        self.beamsplitters.iter().find(|b| b.name == name)
    }

    /// Copy of the spec with splitter `name` set to `percent`.
    pub fn with_reflectivity(&self, name: &str, percent: f64) -> Result<NetworkSpec> {
        let mut spec = self.clone();
        let bs = spec
            .beamsplitters
            .iter_mut()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        bs.reflectivity_percent = Percent::new(percent)?;
        Ok(spec)
    }

    pub fn with_inputs(&self, inputs: Vec<InputMode>) -> NetworkSpec {
        NetworkSpec { inputs, ..self.clone() }
    }

    pub fn with_efficiencies(&self, efficiencies: &[f64]) -> Result<NetworkSpec> {
        let eff = efficiencies
            .iter()
            .map(|&e| Fraction::new(e))
            .collect::<Result<Vec<_>>>()?;
        let spec = NetworkSpec {
            efficiencies: Some(eff),
            ..self.clone()
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 1-based rail receiving the asymmetric loss.
    pub fn loss_arm(&self) -> usize {
        self.loss_arm.unwrap_or(1)
    }
}

/// Adds a loss of `loss_fraction` on the designated output arm of the first
/// splitter, acting before any later splitter. Replaces an earlier injection
/// on the same arm.
pub fn inject_asymmetric_loss(spec: &NetworkSpec, loss_fraction: f64) -> Result<NetworkSpec> {
    if !(0.0..=1.0).contains(&loss_fraction) {
        return Err(Error::OutOfRange {
            name: "loss_fraction",
            value: loss_fraction,
            range: "[0, 1]",
        });
    }
    let first = spec
        .beamsplitter(FIRST_SPLITTER)
        .ok_or_else(|| invalid("beamsplitters", format!("no splitter named `{FIRST_SPLITTER}`")))?;
    let arm = spec.loss_arm();
    if !first.mode_pair.contains(&arm) {
        return Err(invalid(
            "loss_arm",
            format!("mode {arm} is not an output arm of {FIRST_SPLITTER}"),
        ));
    }
    let mut out = spec.clone();
    out.losses
        .retain(|l| !(l.mode == arm && l.after.as_deref() == Some(FIRST_SPLITTER)));
    out.losses.push(LossChannel {
        mode: arm,
        transmission: Fraction::new(1.0 - loss_fraction)?,
        after: Some(FIRST_SPLITTER.to_string()),
    });
    Ok(out)
}

/// A propagated network: the output state and the modes kept for analysis (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltNetwork {
    pub state: GaussianState,
    pub active_modes: Vec<usize>,
}

/// Propagates the inputs through the splitters in list order, then applies
/// the losses and detection efficiencies.
pub fn build(spec: &NetworkSpec) -> Result<BuiltNetwork> {
    spec.validate()?;
    let mut state = spec.inputs[0].state()?;
    for input in &spec.inputs[1..] {
        state = state.tensor(&input.state()?);
    }
    // which rails carry light from a squeezed input
    let mut carries: Vec<bool> = spec.inputs.iter().map(InputMode::is_squeezed).collect();

    let apply_losses = |state: GaussianState, after: Option<&str>| -> Result<GaussianState> {
        spec.losses
            .iter()
            .filter(|l| l.after.as_deref() == after)
            .try_fold(state, |s, l| s.apply_loss(l.mode - 1, l.transmission.value()))
    };

    for bs in &spec.beamsplitters {
        let (a, b) = (bs.mode_pair[0] - 1, bs.mode_pair[1] - 1);
        let r = bs.reflectivity_percent.fraction();
        state = state.apply_beamsplitter(a, b, r)?.swap_modes(a, b)?;
        if r == 0.0 {
            carries.swap(a, b);
        } else if r < 1.0 {
            let either = carries[a] || carries[b];
            carries[a] = either;
            carries[b] = either;
        }
        state = apply_losses(state, Some(&bs.name))?;
    }
    state = apply_losses(state, None)?;
    if let Some(eff) = &spec.efficiencies {
        for (mode, t) in eff.iter().enumerate() {
            state = state.apply_loss(mode, t.value())?;
        }
    }

    let active_modes = match &spec.active_modes {
        Some(labels) => labels.iter().map(|m| m - 1).collect(),
        None => carries
            .iter()
            .enumerate()
            .filter_map(|(m, &c)| c.then_some(m))
            .collect(),
    };
    Ok(BuiltNetwork { state, active_modes })
}

/// `count` random chain networks drawn from `seed`: mixed squeezed inputs on
/// rails 1 and 2, 1 to 7 splitters at arbitrary reflectivity, and optionally
/// per-mode efficiencies and an asymmetric loss after the first splitter.
pub fn random_chain_specs(seed: u64, count: usize) -> Vec<NetworkSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_chain_spec(&mut rng)).collect()
}

fn random_input<R: Rng>(rng: &mut R) -> InputMode {
    let sq = rng.random_range(0.5..8.0);
    InputMode::Squeezed {
        var_sq_db: -sq,
        var_anti_db: sq + rng.random_range(0.0..4.0),
        squeezed_axis: if rng.random_bool(0.5) {
            Quadrature::X
        } else {
            Quadrature::P
        },
    }
}

fn random_chain_spec<R: Rng>(rng: &mut R) -> NetworkSpec {
    let mut inputs = vec![random_input(rng), random_input(rng)];
    inputs.extend(std::iter::repeat_n(InputMode::Vacuum, 6));
    let n_split = rng.random_range(1..=CHAIN.len());
    let beamsplitters = CHAIN[..n_split]
        .iter()
        .map(|&(name, mode_pair)| BeamSplitter {
            name: name.to_string(),
            mode_pair,
            reflectivity_percent: Percent(rng.random_range(1.0..99.0)),
        })
        .collect();
    let efficiencies = rng
        .random_bool(0.5)
        .then(|| (0..8).map(|_| Fraction(rng.random_range(0.85..=1.0))).collect());
    let losses = if rng.random_bool(0.5) {
        vec![LossChannel {
            mode: rng.random_range(1..=2),
            transmission: Fraction(rng.random_range(0.0..=1.0)),
            after: Some(FIRST_SPLITTER.to_string()),
        }]
    } else {
        Vec::new()
    };
    NetworkSpec {
        inputs,
        beamsplitters,
        losses,
        efficiencies,
        active_modes: None,
        loss_arm: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::{collective_steering_report, steering_product};

    #[test]
    fn preset_rows() {
        let r = |n: usize| -> Vec<f64> {
            chain_preset(n)
                .unwrap()
                .beamsplitters
                .iter()
                .map(|b| b.reflectivity_percent.value())
                .collect()
        };
        assert_eq!(r(2), vec![50.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0]);
        assert_eq!(r(3), vec![51.1, 50.0, 100.0, 100.0, 100.0, 100.0, 100.0]);
        assert_eq!(r(5), vec![50.8, 33.3, 50.0, 50.0, 100.0, 100.0, 100.0]);
        assert_eq!(r(7), vec![50.6, 25.0, 33.3, 33.3, 50.0, 50.0, 100.0]);
        assert_eq!(r(8), vec![50.0, 25.0, 25.0, 33.3, 33.3, 50.0, 50.0]);
        assert!(chain_preset(1).is_err());
        assert!(chain_preset(9).is_err());
        assert_eq!("n5".parse::<Preset>().unwrap().n(), 5);
        assert!("n9".parse::<Preset>().is_err());
    }

    #[test]
    fn presets_have_n_active_modes() {
        for preset in Preset::all() {
            let built = build(&preset.spec()).unwrap();
            assert_eq!(built.active_modes.len(), preset.n(), "{preset}");
            built.state.check_physical().unwrap();
        }
        let n3 = build(&chain_preset(3).unwrap()).unwrap();
        assert_eq!(n3.active_modes, vec![0, 1, 2]);
    }

    #[test]
    fn all_mirror_network_is_transparent() {
        let mut spec = chain_preset(2).unwrap();
        spec.beamsplitters[0].reflectivity_percent = Percent(100.0);
        let built = build(&spec).unwrap();
        assert_eq!(built.active_modes, vec![0, 1]);
        let mut input = spec.inputs[0].state().unwrap();
        for i in &spec.inputs[1..] {
            input = input.tensor(&i.state().unwrap());
        }
        // block-diagonal input: sign flips leave it untouched
        assert_eq!(built.state, input);
        let sp = steering_product(&built.state, 0, &[1]).unwrap();
        let expected = input.variance(0, Quadrature::X) * input.variance(0, Quadrature::P);
        assert!((sp.steering_number - expected).abs() < 1e-12);
    }

    #[test]
    fn n2_preset_is_two_way_steerable() {
        let built = build(&chain_preset(2).unwrap()).unwrap();
        let report = collective_steering_report(&built.state, &built.active_modes).unwrap();
        assert_eq!(report.regime_count, 2);
        assert!(report.entries.iter().all(|e| e.steering_number < 1.0));
    }

    #[test]
    fn asymmetric_loss_injection() {
        let spec = chain_preset(7).unwrap();
        let zero = inject_asymmetric_loss(&spec, 0.0).unwrap();
        assert_eq!(build(&zero).unwrap(), build(&spec).unwrap());
        let lossy = inject_asymmetric_loss(&spec, 0.33).unwrap();
        let again = inject_asymmetric_loss(&lossy, 0.33).unwrap();
        assert_eq!(lossy, again);
        assert_eq!(lossy.losses.len(), 1);
        assert_eq!(lossy.losses[0].after.as_deref(), Some(FIRST_SPLITTER));
        assert!(inject_asymmetric_loss(&spec, 1.5).is_err());

        let mut no_first = spec.clone();
        no_first.beamsplitters.remove(0);
        assert!(inject_asymmetric_loss(&no_first, 0.1).is_err());
    }

    #[test]
    fn full_loss_decouples_the_lossy_side() {
        let spec = inject_asymmetric_loss(&chain_preset(7).unwrap(), 1.0).unwrap();
        let built = build(&spec).unwrap();
        let report = collective_steering_report(&built.state, &built.active_modes).unwrap();
        // rail 1 feeds modes 1, 3, 5, 7; with it fully lost they hold vacuum
        let lossy_side = [0usize, 2, 4, 6];
        for &m in &lossy_side {
            let dim = 2 * built.state.n_modes();
            for q in Quadrature::BOTH {
                let r = q.index(m);
                for c in 0..dim {
                    let expect = if c == r { 1.0 } else { 0.0 };
                    let v = built.state.covariance()[(r, c)];
                    assert!((v - expect).abs() < 1e-12, "mode {} row {} col {}: {}", m + 1, r, c, v);
                }
            }
            assert!(!report.entry(m).unwrap().steerable);
        }
        let clean = [1usize, 3, 5];
        let clean_report = collective_steering_report(&built.state, &clean).unwrap();
        assert_eq!(report.regime_count, clean_report.regime_count);
    }

    #[test]
    fn random_specs_are_seeded_and_valid() {
        let a = random_chain_specs(3, 20);
        assert_eq!(a, random_chain_specs(3, 20));
        assert_ne!(a, random_chain_specs(4, 20));
        for spec in &a {
            spec.validate().unwrap();
            build(spec).unwrap();
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let spec = inject_asymmetric_loss(&chain_preset(5).unwrap(), 0.2)
            .unwrap()
            .with_efficiencies(&[0.98; 8])
            .unwrap();
        let text = spec.to_json_pretty().unwrap();
        assert_eq!(NetworkSpec::from_json_str(&text).unwrap(), spec);

        let bad = text.replacen("50.8", "150.8", 1);
        let err = NetworkSpec::from_json_str(&bad).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");

        let mut dup = chain_preset(2).unwrap();
        dup.beamsplitters[1].mode_pair = [1, 1];
        assert!(matches!(dup.validate(), Err(Error::InvalidSpec { .. })));
        let mut oob = chain_preset(2).unwrap();
        oob.beamsplitters[1].mode_pair = [1, 9];
        assert!(matches!(oob.validate(), Err(Error::InvalidSpec { .. })));

        let mut unphysical = chain_preset(2).unwrap();
        unphysical.inputs[0] = InputMode::Squeezed {
            var_sq_db: -6.0,
            var_anti_db: 3.0,
            squeezed_axis: Quadrature::X,
        };
        assert!(build(&unphysical).unwrap_err().is_unphysical());
    }
}
