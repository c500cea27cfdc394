//! Forced oscillators: integration, Poincare maps, ensemble scans and
//! oscillation counting.

mod exact;
mod forcing;
mod integrate;
mod oscillation;
mod poincare;
mod scan;

use thiserror::Error;

pub use crate::point::PhasePoint;
pub use exact::AbsFlow;
pub use forcing::{Forcing, Waveform};
pub use integrate::{Advance, Event, EventKind, FlowOptions, FlowStatus, Oscillator, StepReport, Trajectory};
pub use oscillation::{oscillation_counts, OscillationCount};
pub use poincare::{Orbit, PoincareMap};
pub use scan::{fixed_point_scan, scatter, FixedPoint, IcLine, ScanWindow, ScatterFlag, ScatterRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid forcing: {0}")]
    InvalidForcing(String),
    #[error("solution left the bounded region at t = {t} ({point:?})")]
    BlowUp { t: f64, point: PhasePoint },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("forcing is not periodic")]
    NotPeriodic,
}
