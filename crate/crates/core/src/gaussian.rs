//! Zero-mean Gaussian states of `N` optical modes and the linear-optics
//! maps that act on them.
//!
//! Quadratures are ordered mode-major, `(x_1, p_1, x_2, p_2, ...)`, and
//! variances are in shot-noise units: the vacuum has unit covariance, so the
//! per-mode uncertainty bound reads `Var(x) Var(p) - Cov(x,p)^2 >= 1`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack allowed on the per-mode uncertainty bound.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// One of the two canonical field quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::X, Quadrature::P];

    /// Offset of this quadrature inside a mode's 2x2 block.
    #[inline]
    pub fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    /// Row/column of this quadrature of `mode` in the covariance matrix.
    #[inline]
    pub fn index(self, mode: usize) -> usize {
        2 * mode + self.offset()
    }

    pub fn conjugate(self) -> Quadrature {
        match self {
            Quadrature::X => Quadrature::P,
            Quadrature::P => Quadrature::X,
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::X => f.write_str("x"),
            Quadrature::P => f.write_str("p"),
        }
    }
}

impl std::str::FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Quadrature::X),
            "p" | "P" => Ok(Quadrature::P),
            other => Err(Error::InvalidArgument(format!(
                "unknown quadrature `{other}` (expected x or p)"
            ))),
        }
    }
}

/// Converts a noise level in decibels relative to shot noise into a variance.
#[inline]
pub fn db_to_variance(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A real linear combination of the quadratures of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    coefficients: DVector<f64>,
}

impl LinearForm {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroForm);
        }
        Ok(Self {
            coefficients: DVector::from_vec(coefficients),
        })
    }

    /// Builds a form over `n_modes` modes from `(mode, quadrature, coefficient)`
    /// terms. Repeated terms accumulate.
    pub fn from_terms(n_modes: usize, terms: &[(usize, Quadrature, f64)]) -> Result<Self> {
        let mut coefficients = vec![0.0; 2 * n_modes];
        for &(mode, quad, c) in terms {
            if mode >= n_modes {
                return Err(Error::ModeOutOfRange { index: mode, n_modes });
            }
            coefficients[quad.index(mode)] += c;
        }
        Self::new(coefficients)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        self.coefficients.as_slice()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|c| c * factor).collect())
    }
}

/// A zero-mean multimode Gaussian state described by its covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// `n_modes` vacuum modes: identity covariance.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::NoModes);
        }
        Ok(Self {
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// A single, possibly mixed, squeezed mode with diagonal covariance.
    ///
    /// The variance of `squeezed_axis` is `10^(var_sq_db/10)` and that of the
    /// conjugate quadrature `10^(var_anti_db/10)`. Pairs whose product falls
    /// below the uncertainty bound are rejected.
    pub fn squeezed_mode(var_sq_db: f64, var_anti_db: f64, squeezed_axis: Quadrature) -> Result<Self> {
        if !var_sq_db.is_finite() || !var_anti_db.is_finite() {
            return Err(Error::Unphysical(format!(
                "non-finite squeezing parameters ({var_sq_db} dB, {var_anti_db} dB)"
            )));
        }
        let v_sq = db_to_variance(var_sq_db);
        let v_anti = db_to_variance(var_anti_db);
        if v_sq * v_anti < 1.0 - UNCERTAINTY_TOL {
            return Err(Error::Unphysical(format!(
                "variance product {:.6} < 1 for ({var_sq_db} dB, {var_anti_db} dB)",
                v_sq * v_anti
            )));
        }
        let mut cov = DMatrix::zeros(2, 2);
        cov[(squeezed_axis.offset(), squeezed_axis.offset())] = v_sq;
        let anti = squeezed_axis.conjugate().offset();
        cov[(anti, anti)] = v_anti;
        Ok(Self { cov })
    }

    /// Wraps a covariance matrix after checking that it describes a physical state.
    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self> {
        let state = Self { cov };
        state.check_physical()?;
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn into_covariance(self) -> DMatrix<f64> {
        self.cov
    }

    /// Covariance between quadrature `qa` of mode `a` and `qb` of mode `b`.
    pub fn cov_entry(&self, a: usize, qa: Quadrature, b: usize, qb: Quadrature) -> f64 {
        self.cov[(qa.index(a), qb.index(b))]
    }

    pub fn variance(&self, mode: usize, quad: Quadrature) -> f64 {
        self.cov_entry(mode, quad, mode, quad)
    }

    /// `det` of the 2x2 block of `mode`.
    pub fn mode_determinant(&self, mode: usize) -> f64 {
        let xx = self.variance(mode, Quadrature::X);
        let pp = self.variance(mode, Quadrature::P);
        let xp = self.cov_entry(mode, Quadrature::X, mode, Quadrature::P);
        xx * pp - xp * xp
    }

    /// True when `mode` is exactly an unmixed vacuum: unit block, no correlations.
    pub fn is_vacuum_mode(&self, mode: usize) -> bool {
        let dim = self.cov.nrows();
        Quadrature::BOTH.iter().all(|q| {
            let r = q.index(mode);
            (0..dim).all(|c| {
                let expect = if c == r { 1.0 } else { 0.0 };
                self.cov[(r, c)] == expect
            })
        })
    }

    /// Verifies symmetry, positive semidefiniteness and the per-mode
    /// uncertainty bound.
    pub fn check_physical(&self) -> Result<()> {
        let n = self.cov.nrows();
        if n == 0 || !n.is_multiple_of(2) || self.cov.ncols() != n {
            return Err(Error::Unphysical(format!(
                "covariance must be square with even dimension, got {}x{}",
                n,
                self.cov.ncols()
            )));
        }
        if self.cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unphysical("covariance has non-finite entries".into()));
        }
        let scale = self.cov.amax().max(1.0);
        for r in 0..n {
            for c in (r + 1)..n {
                if (self.cov[(r, c)] - self.cov[(c, r)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Unphysical(format!("covariance not symmetric at ({r}, {c})")));
                }
            }
        }
        let eig = self.cov.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig < -UNCERTAINTY_TOL * scale {
            return Err(Error::Unphysical(format!(
                "covariance not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        for mode in 0..self.n_modes() {
            let det = self.mode_determinant(mode);
            if det < 1.0 - UNCERTAINTY_TOL {
                return Err(Error::Unphysical(format!(
                    "mode {} violates the uncertainty bound (det = {det})",
                    mode + 1
                )));
            }
        }
        Ok(())
    }

    /// Block-diagonal product `self ⊗ other`; `other`'s modes follow `self`'s.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (na, nb) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(na + nb, na + nb);
        cov.view_mut((0, 0), (na, na)).copy_from(&self.cov);
        cov.view_mut((na, na), (nb, nb)).copy_from(&other.cov);
        GaussianState { cov }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::ModeOutOfRange {
                index: mode,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }

    /// Mixes modes `i` and `j` on a beam splitter of reflectivity `reflectivity`.
    ///
    /// With `eta = 1 - reflectivity` both quadratures transform as
    /// `q_i' = sqrt(eta) q_i + sqrt(1-eta) q_j` and
    /// `q_j' = -sqrt(1-eta) q_i + sqrt(eta) q_j`.
    pub fn apply_beamsplitter(&self, i: usize, j: usize, reflectivity: f64) -> Result<GaussianState> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::DuplicateMode(i));
        }
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(Error::OutOfRange {
                name: "reflectivity",
                value: reflectivity,
                range: "[0, 1]",
            });
        }
        let eta = 1.0 - reflectivity;
        let t = eta.sqrt();
        let r = (1.0 - eta).sqrt();
        let mut cov = self.cov.clone();
        let dim = cov.nrows();
        for quad in Quadrature::BOTH {
            let (a, b) = (quad.index(i), quad.index(j));
            // rows
            for c in 0..dim {
                let (va, vb) = (cov[(a, c)], cov[(b, c)]);
                cov[(a, c)] = t * va + r * vb;
                cov[(b, c)] = -r * va + t * vb;
            }
            // columns
            for row in 0..dim {
                let (va, vb) = (cov[(row, a)], cov[(row, b)]);
                cov[(row, a)] = t * va + r * vb;
                cov[(row, b)] = -r * va + t * vb;
            }
        }
        Ok(GaussianState { cov })
    }

    /// Passes mode `i` through a channel of power transmission `transmission`,
    /// modelled as a beam splitter against a fresh vacuum that is traced out.
    pub fn apply_loss(&self, i: usize, transmission: f64) -> Result<GaussianState> {
        self.check_mode(i)?;
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::OutOfRange {
                name: "transmission",
                value: transmission,
                range: "[0, 1]",
            });
        }
        let amp = transmission.sqrt();
        let mut cov = self.cov.clone();
        for quad in Quadrature::BOTH {
            let k = quad.index(i);
            cov.row_mut(k).scale_mut(amp);
            cov.column_mut(k).scale_mut(amp);
        }
        for quad in Quadrature::BOTH {
            let k = quad.index(i);
            cov[(k, k)] += 1.0 - transmission;
        }
        Ok(GaussianState { cov })
    }

    /// Relabels modes `i` and `j`. No physical action.
    pub fn swap_modes(&self, i: usize, j: usize) -> Result<GaussianState> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        let mut cov = self.cov.clone();
        if i != j {
            for quad in Quadrature::BOTH {
                cov.swap_rows(quad.index(i), quad.index(j));
                cov.swap_columns(quad.index(i), quad.index(j));
            }
        }
        Ok(GaussianState { cov })
    }

    /// `formᵀ · cov · form`.
    pub fn variance_of(&self, form: &LinearForm) -> Result<f64> {
        if form.len() != self.cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.cov.nrows(),
                got: form.len(),
            });
        }
        let v = &form.coefficients;
        Ok(v.dot(&(&self.cov * v)).max(0.0))
    }
}
