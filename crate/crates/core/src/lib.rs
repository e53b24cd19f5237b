//! Multipartite EPR steering in Gaussian linear-optics networks.
//!
//! [`gaussian`] holds the covariance-matrix state model and the beam-splitter
//! and loss maps, [`network`] assembles chain networks from declarative specs,
//! [`steering`] evaluates inferred variances and steering criteria,
//! [`optimize`] runs reflectivity sweeps, optimisation and loss-regime scans,
//! and [`oracle`] re-derives the same quantities from Monte Carlo samples.

pub mod error;
pub mod gaussian;
mod labels;
pub mod network;
pub mod optimize;
pub mod oracle;
pub mod steering;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, LinearForm, Quadrature};
pub use network::{build, chain_preset, inject_asymmetric_loss, random_chain_specs, BuiltNetwork, NetworkSpec, Preset};
pub use steering::{
    classify_regime, collective_steering_report, inferred_variance, monogamy_check, optimal_gains, steering_product,
    tripartite_criteria, GainVector, SteeringReport, TripartiteVerdict,
};
