//! Switched-system horseshoes: oriented rectangles in the strip and the
//! annulus, switching-time thresholds, stretching along sampled paths and
//! periodic points with prescribed itineraries.
//!
//! Everything here is numerical evidence. Paths are sampled and refined, not
//! enclosed, and a granted certificate says so in its claim.

mod certify;
mod geometry;
mod periodic;
mod stretch;
mod thresholds;

use thiserror::Error;

pub use certify::{
    certify_horseshoe, Certification, HorseshoeCertificate, StepSchedule, ThresholdCheck, Verdict, TAU1_INEQUALITY,
    TAU2_INEQUALITY,
};
pub use geometry::{GeometrySummary, Levels, Placement, RectangleId, RegionGeometry, Side};
pub use periodic::{find_periodic_orbit, Itinerary, PeriodicOptions, PeriodicOrbit, ReturnMap};
pub use stretch::{
    verify_stretch, CrossingRecord, NodeState, PathRecord, Stage, StageMap, StretchCertificate, StretchOptions,
    StretchVerdict,
};
pub use thresholds::{tau_stars, TauStars, ThresholdComponents};

use crate::flow::FlowError;
use crate::model::ModelError;
use crate::timemap::TimeMapError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HorseshoeError {
    #[error("region constraint violated: {inequality} ({detail})")]
    Constraint { inequality: &'static str, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no periodic orbit found: {0}")]
    NotFound(String),
    #[error("symbol {symbol} is outside the alphabet of {size} symbols")]
    Alphabet { symbol: usize, size: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    TimeMap(#[from] TimeMapError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}
