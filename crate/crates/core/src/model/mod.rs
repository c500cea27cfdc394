//! Nonlinearities and the phase-plane geometry of u'' + f(u) = k.

mod frame;
mod level;
mod nonlinearity;

use thiserror::Error;

pub use frame::{equilibria, homoclinic_intercept, ordering_check, EnergyFrame, FrameSummary, OrderingReport, DEFAULT_ROOT_TOL};
pub use level::{LevelClassification, LevelKind, NamedRoot, RootName};
pub use nonlinearity::{Nonlinearity, Smoothness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown nonlinearity `{0}`")]
    UnknownNonlinearity(String),
    #[error("nonlinearity violates the shape hypothesis: {0}")]
    Hypothesis(String),
    #[error("forcing level k = {0} must be non-negative")]
    NegativeLevel(f64),
    #[error("homoclinic loop degenerates for k = {0}; need k > 0")]
    DegenerateLoop(f64),
    #[error("need k1 < k2, got k1 = {k1}, k2 = {k2}")]
    Ordering { k1: f64, k2: f64 },
    #[error("level {rho} has no root on the {branch} branch")]
    NoRoot { rho: f64, branch: &'static str },
    #[error(transparent)]
    Root(#[from] crate::roots::RootError),
}
