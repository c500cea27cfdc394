//! Melnikov-type analysis along the homoclinic loop of the saddle.

mod area;
mod homoclinic;
mod integrals;
mod threshold;
mod zeros;

use thiserror::Error;

use crate::model::ModelError;

pub use area::{loop_area, loop_area_at, propose_intervals, AreaInterval, AreaSample, Extremum};
pub use homoclinic::{HomoclinicOrbit, OrbitOptions};
pub use integrals::{delta, delta_curve, eta, eta_derivative, sine_transform, total_excursion, xi_terms, DeltaEstimate};
pub use threshold::{omega_threshold, BranchWitness, OmegaThreshold};
pub use zeros::{
    critical_points, detect_zeros, CriticalPoint, SimpleZero, ZeroReport, SIGN_CHANGE_EVIDENCE, SIMPLE_ZERO_EVIDENCE,
    SLOW_FORCING_EVIDENCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MelnikovError {
    #[error("nonlinearity `{0}` is not C2; the Melnikov construction needs a smooth saddle loop")]
    Ineligible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("homoclinic orbit construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
