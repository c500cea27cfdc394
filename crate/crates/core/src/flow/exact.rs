//! Closed-form flow of u'' + |u| = k.
//!
//! On x >= 0 the motion is harmonic about (k, 0), on x < 0 hyperbolic about
//! (-k, 0). Crossings of x = 0 are solved analytically, so the only error is
//! floating-point rounding in each segment.

use super::FlowError;
use crate::point::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsFlow {
    k: f64,
    blowup_bound: f64,
}

/// The right half-plane owns x = 0 unless the point is moving left.
fn on_right(z: PhasePoint) -> bool {
    z.x > 0.0 || (z.x == 0.0 && z.y >= 0.0)
}

impl AbsFlow {
    pub fn new(k: f64, blowup_bound: f64) -> Self {
        Self { k, blowup_bound }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn evolve(&self, z: PhasePoint, right: bool, tau: f64) -> PhasePoint {
        let k = self.k;
        if right {
            let (s, c) = tau.sin_cos();
            let p = z.x - k;
            PhasePoint::new(k + p * c + z.y * s, -p * s + z.y * c)
        } else {
            let (s, c) = (tau.sinh(), tau.cosh());
            let p = z.x + k;
            PhasePoint::new(-k + p * c + z.y * s, p * s + z.y * c)
        }
    }

    /// Time until the half-plane is left, `None` if never.
    fn time_to_switch(&self, z: PhasePoint, right: bool) -> Option<f64> {
        let k = self.k;
        if right {
            // x = k + R cos(tau - phi); leaving means x = 0 with y < 0.
            let p = z.x - k;
            let r = p.hypot(z.y);
            if !(r > k.abs()) {
                return None;
            }
            let phi = z.y.atan2(p);
            let tau = (phi + (-k / r).acos()).rem_euclid(2.0 * std::f64::consts::PI);
            Some(tau)
        } else {
            // P cosh + Q sinh = k as (P + Q) e^2 - 2 k e + (P - Q) = 0 in e = exp(tau).
            let (p, q) = (z.x + k, z.y);
            let (alpha, beta) = (p + q, p - q);
            let disc = k * k - alpha * beta;
            if disc < 0.0 {
                return None;
            }
            let big = k + if k >= 0.0 { disc.sqrt() } else { -disc.sqrt() };
            let mut roots = Vec::with_capacity(2);
            if alpha != 0.0 {
                roots.push(big / alpha);
            }
            if big != 0.0 {
                roots.push(beta / big);
            }
            roots
                .into_iter()
                .filter(|&e| e > 1.0 && e.is_finite())
                .map(|e| (e - 1.0).ln_1p())
                .filter(|&tau| tau > 0.0 && self.evolve(z, false, tau).y > 0.0)
                .min_by(f64::total_cmp)
        }
    }

    fn blown(&self, z: PhasePoint) -> bool {
        !(z.x.abs() + z.y.abs() <= self.blowup_bound)
    }

    /// Flows z0 for time t >= 0, calling `observer(t, z)` at every switch and
    /// at sub-samples no further apart than `max_dt` when given.
    pub fn run<O: FnMut(f64, PhasePoint)>(
        &self,
        z0: PhasePoint,
        t: f64,
        max_dt: Option<f64>,
        mut observer: O,
    ) -> Result<PhasePoint, FlowError> {
        assert!(t >= 0.0, "closed-form flow runs forward only");
        let mut z = z0;
        let mut now = 0.0;
        while now < t {
            let right = on_right(z);
            let remaining = t - now;
            let switch = self.time_to_switch(z, right).filter(|&s| s < remaining);
            let span = switch.unwrap_or(remaining);
            if let Some(dt) = max_dt {
                let n = (span / dt).ceil().max(1.0) as usize;
                for i in 1..n {
                    let w = self.evolve(z, right, span * i as f64 / n as f64);
                    if self.blown(w) {
                        return Err(FlowError::BlowUp { t: now + span * i as f64 / n as f64, point: w });
                    }
                    observer(now + span * i as f64 / n as f64, w);
                }
            }
            let mut w = self.evolve(z, right, span);
            if switch.is_some() {
                w.x = 0.0;
                // Keep the direction of crossing even if rounding nudged y to 0.
                if right && w.y >= 0.0 {
                    w.y = -f64::MIN_POSITIVE;
                } else if !right && w.y <= 0.0 {
                    w.y = f64::MIN_POSITIVE;
                }
            }
            now = if switch.is_some() { now + span } else { t };
            if self.blown(w) {
                return Err(FlowError::BlowUp { t: now, point: w });
            }
            observer(now, w);
            z = w;
        }
        Ok(z)
    }

    pub fn flow(&self, z0: PhasePoint, t: f64) -> Result<PhasePoint, FlowError> {
        self.run(z0, t, None, |_, _| {})
    }
}
