//! Inferred variances, EPR steering products and the multipartite
//! steering / entanglement criteria built on them.
//!
//! Every threshold here is in the squared (variance) convention: mode `j` is
//! steered by `K` when `Var_inf(x_j) Var_inf(p_j) < 1`, and the tripartite
//! product `Var(u) Var(v)` certifies genuine entanglement below 1 and genuine
//! steering below 1/4.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, LinearForm, Quadrature};
use crate::labels;

/// Relative singular-value cutoff below which a steering-set covariance is
/// treated as singular and solved in the least-norm sense.
pub const SINGULAR_RCOND: f64 = 1e-12;
/// Tolerance applied to the monogamy bound.
pub const MONOGAMY_TOL: f64 = 1e-9;
/// Margin below one a steering number must clear to count as steerable.
pub const STEERING_TOL: f64 = 1e-10;
/// Squared-convention threshold for genuine tripartite steering.
pub const GENUINE_STEERING_THRESHOLD: f64 = 0.25;

/// Result of the optimal linear inference of one quadrature of mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// Minimised `Var(q_j + Σ g_k q_k)`.
    pub variance: f64,
    /// Optimal gains, one per entry of the steering set.
    pub gains: Vec<f64>,
    /// Set when the steering-set covariance was rank deficient.
    pub singular: bool,
}

fn validate_target(state: &GaussianState, j: usize, set: &[usize]) -> Result<()> {
    let n_modes = state.n_modes();
    if j >= n_modes {
        return Err(Error::ModeOutOfRange { index: j, n_modes });
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    for (pos, &k) in set.iter().enumerate() {
        if k >= n_modes {
            return Err(Error::ModeOutOfRange { index: k, n_modes });
        }
        if k == j {
            return Err(Error::SteeredInSet(j));
        }
        if set[..pos].contains(&k) {
            return Err(Error::DuplicateMode(k));
        }
    }
    Ok(())
}

/// Minimises `Var(q_j + Σ_{k∈K} g_k q_k)` over real gains, using only the
/// `axis` quadratures of the steering set.
///
/// The minimiser is `g = -C_KK⁺ c_Kj` and the minimum is the Schur complement
/// `Var(q_j) - c_Kjᵀ C_KK⁺ c_Kj`.
pub fn infer(state: &GaussianState, j: usize, set: &[usize], axis: Quadrature) -> Result<Inference> {
    validate_target(state, j, set)?;
    let cov = state.covariance();
    let target = axis.index(j);
    let rows: Vec<usize> = set.iter().map(|&k| axis.index(k)).collect();
    let k = rows.len();
    let block = DMatrix::from_fn(k, k, |r, c| cov[(rows[r], rows[c])]);
    let cross = DVector::from_fn(k, |r, _| cov[(rows[r], target)]);
    let var_j = cov[(target, target)];

    let svd = block.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = SINGULAR_RCOND * smax.max(f64::MIN_POSITIVE);
    let singular = smax == 0.0 || svd.singular_values.iter().any(|s| *s <= cutoff);
    let gains = if smax == 0.0 {
        DVector::zeros(k)
    } else {
        -svd.solve(&cross, cutoff)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
    };
    // gᵀ C g = -gᵀ c at the optimum
    let variance = (var_j + gains.dot(&cross)).clamp(0.0, var_j);
    Ok(Inference {
        variance,
        gains: gains.iter().copied().collect(),
        singular,
    })
}

/// Optimal gains `g_{k,axis}` for inferring quadrature `axis` of mode `j` from `set`.
pub fn optimal_gains(state: &GaussianState, j: usize, set: &[usize], axis: Quadrature) -> Result<Vec<f64>> {
    infer(state, j, set, axis).map(|inf| inf.gains)
}

/// `Var_inf(q_j)`: the variance (not the standard deviation) of the optimal inference.
pub fn inferred_variance(state: &GaussianState, j: usize, set: &[usize], axis: Quadrature) -> Result<f64> {
    infer(state, j, set, axis).map(|inf| inf.variance)
}

/// Optimised inference gains for both quadratures of one steered mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainVector {
    #[serde(serialize_with = "labels::one")]
    pub steered_mode: usize,
    #[serde(serialize_with = "labels::many")]
    pub steering_set: Vec<usize>,
    pub gains_x: Vec<f64>,
    pub gains_p: Vec<f64>,
}

impl GainVector {
    pub fn optimal(state: &GaussianState, j: usize, set: &[usize]) -> Result<Self> {
        Ok(Self {
            steered_mode: j,
            steering_set: set.to_vec(),
            gains_x: optimal_gains(state, j, set, Quadrature::X)?,
            gains_p: optimal_gains(state, j, set, Quadrature::P)?,
        })
    }

    /// The estimator `q_j + Σ g_k q_k` for `axis` as an explicit linear form.
    pub fn form(&self, n_modes: usize, axis: Quadrature) -> Result<LinearForm> {
        let gains = match axis {
            Quadrature::X => &self.gains_x,
            Quadrature::P => &self.gains_p,
        };
        if gains.len() != self.steering_set.len() {
            return Err(Error::DimensionMismatch {
                expected: self.steering_set.len(),
                got: gains.len(),
            });
        }
        let mut terms = vec![(self.steered_mode, axis, 1.0)];
        terms.extend(self.steering_set.iter().zip(gains).map(|(&k, &g)| (k, axis, g)));
        LinearForm::from_terms(n_modes, &terms)
    }
}

/// Directional steering of one mode by a set of others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringProduct {
    #[serde(serialize_with = "labels::one")]
    pub steered_mode: usize,
    #[serde(serialize_with = "labels::many")]
    pub steering_set: Vec<usize>,
    pub inferred_var_x: f64,
    pub inferred_var_p: f64,
    /// `S_{j|K} = Δ_inf(x_j) Δ_inf(p_j)` (standard-deviation product).
    pub s: f64,
    /// `S_{j|K}^2`.
    pub steering_number: f64,
    pub steerable: bool,
    pub singular: bool,
}

pub fn steering_product(state: &GaussianState, j: usize, set: &[usize]) -> Result<SteeringProduct> {
    let ix = infer(state, j, set, Quadrature::X)?;
    let ip = infer(state, j, set, Quadrature::P)?;
    let steering_number = ix.variance * ip.variance;
    Ok(SteeringProduct {
        steered_mode: j,
        steering_set: set.to_vec(),
        inferred_var_x: ix.variance,
        inferred_var_p: ip.variance,
        s: steering_number.sqrt(),
        steering_number,
        steerable: steering_number < 1.0 - STEERING_TOL,
        singular: ix.singular || ip.singular,
    })
}

/// Steering of every active mode by all remaining active modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringReport {
    #[serde(serialize_with = "labels::many")]
    pub active_modes: Vec<usize>,
    pub entries: Vec<SteeringProduct>,
    /// Every mode is steerable by the rest.
    pub full_inseparability: bool,
    /// Number of steerable modes, `0..=N`.
    pub regime_count: usize,
}

impl SteeringReport {
    pub fn max_steering_number(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.steering_number)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_steering_number(&self) -> f64 {
        self.entries.iter().map(|e| e.steering_number).sum::<f64>() / self.entries.len() as f64
    }

    pub fn entry(&self, mode: usize) -> Option<&SteeringProduct> {
        self.entries.iter().find(|e| e.steered_mode == mode)
    }
}

pub fn collective_steering_report(state: &GaussianState, active_modes: &[usize]) -> Result<SteeringReport> {
    if active_modes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a steering report needs at least 2 active modes, got {}",
            active_modes.len()
        )));
    }
    let entries = active_modes
        .par_iter()
        .map(|&j| {
            let rest: Vec<usize> = active_modes.iter().copied().filter(|&k| k != j).collect();
            steering_product(state, j, &rest)
        })
        .collect::<Result<Vec<_>>>()?;
    let regime_count = entries.iter().filter(|e| e.steerable).count();
    Ok(SteeringReport {
        active_modes: active_modes.to_vec(),
        full_inseparability: regime_count == entries.len(),
        regime_count,
        entries,
    })
}

/// Number of modes steerable by the collective of the others.
pub fn classify_regime(report: &SteeringReport) -> usize {
    report.entries.iter().filter(|e| e.steerable).count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monogamy {
    pub s_a_b: f64,
    pub s_a_c: f64,
    pub product: f64,
    pub holds: bool,
}

/// Evaluates `S_{A|B} S_{A|C} >= 1` for disjoint steering sets `B` and `C`.
pub fn monogamy_check(state: &GaussianState, a: usize, b: &[usize], c: &[usize]) -> Result<Monogamy> {
    if let Some(&k) = b.iter().find(|k| c.contains(k)) {
        return Err(Error::OverlappingSets(k));
    }
    let s_a_b = steering_product(state, a, b)?.s;
    let s_a_c = steering_product(state, a, c)?.s;
    let product = s_a_b * s_a_c;
    Ok(Monogamy {
        s_a_b,
        s_a_c,
        product,
        holds: product >= 1.0 - MONOGAMY_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripartiteVerdict {
    #[serde(serialize_with = "labels::many")]
    pub modes: Vec<usize>,
    /// `Var(x_1 - (x_2 + x_3)/√2)`
    pub var_u: f64,
    /// `Var(p_1 + (p_2 + p_3)/√2)`
    pub var_v: f64,
    pub product_of_variances: f64,
    pub genuine_entanglement: bool,
    pub genuine_steering: bool,
}

/// Tripartite criteria for `modes = [first, second, third]`; `first` plays
/// the role of the singled-out system.
pub fn tripartite_criteria(state: &GaussianState, modes: [usize; 3]) -> Result<TripartiteVerdict> {
    let n_modes = state.n_modes();
    for (pos, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { index: m, n_modes });
        }
        if modes[..pos].contains(&m) {
            return Err(Error::DuplicateMode(m));
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let [a, b, c] = modes;
    let u = LinearForm::from_terms(
        n_modes,
        &[(a, Quadrature::X, 1.0), (b, Quadrature::X, -h), (c, Quadrature::X, -h)],
    )?;
    let v = LinearForm::from_terms(
        n_modes,
        &[(a, Quadrature::P, 1.0), (b, Quadrature::P, h), (c, Quadrature::P, h)],
    )?;
    let var_u = state.variance_of(&u)?;
    let var_v = state.variance_of(&v)?;
    let product = var_u * var_v;
    Ok(TripartiteVerdict {
        modes: modes.to_vec(),
        var_u,
        var_v,
        product_of_variances: product,
        genuine_entanglement: product < 1.0,
        genuine_steering: product < GENUINE_STEERING_THRESHOLD,
    })
}
