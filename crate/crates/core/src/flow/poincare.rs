use super::{FlowError, FlowOptions, Forcing, Oscillator};
use crate::point::PhasePoint;

/// Period map z -> z(T) of a T-periodic forced oscillator, from t = 0.
#[derive(Debug, Clone)]
pub struct PoincareMap {
    osc: Oscillator,
    period: f64,
    opts: FlowOptions,
}

/// Iterates of a point, possibly cut short by a failure.
#[derive(Debug, Clone)]
pub struct Orbit {
    /// z0, Psi(z0), Psi^2(z0), ...
    pub points: Vec<PhasePoint>,
    pub truncated: Option<FlowError>,
}

impl PoincareMap {
    pub fn new(osc: Oscillator, opts: FlowOptions) -> Result<Self, FlowError> {
        let period = osc.forcing.period().ok_or(FlowError::NotPeriodic)?;
        Ok(Self { osc, period, opts })
    }

    pub fn oscillator(&self) -> &Oscillator {
        &self.osc
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn options(&self) -> &FlowOptions {
        &self.opts
    }

    pub fn with_options(&self, opts: FlowOptions) -> Self {
        Self { opts, ..self.clone() }
    }

    pub fn apply(&self, z: PhasePoint) -> Result<PhasePoint, FlowError> {
        self.osc.flow(z, 0.0, self.period, &self.opts)
    }

    pub fn iterate(&self, z0: PhasePoint, n: usize) -> Orbit {
        let mut points = Vec::with_capacity(n + 1);
        points.push(z0);
        let mut z = z0;
        for _ in 0..n {
            match self.apply(z) {
                Ok(next) => {
                    points.push(next);
                    z = next;
                }
                Err(e) => {
                    return Orbit {
                        points,
                        truncated: Some(e),
                    }
                }
            }
        }
        Orbit { points, truncated: None }
    }

    /// For step forcing, the two frozen flows and their durations, so that
    /// Psi = Psi_2 o Psi_1 (flow under k1 for t1, then under k2 for t2).
    pub fn half_maps(&self) -> Option<[(Oscillator, f64); 2]> {
        let Forcing::Step { k1, k2, t1, t2 } = self.osc.forcing else {
            return None;
        };
        let mk = |k| Oscillator {
            f: self.osc.f.clone(),
            forcing: Forcing::Constant { k },
            damping: self.osc.damping,
        };
        Some([(mk(k1), t1), (mk(k2), t2)])
    }
}
