use std::f64::consts::PI;

use serde::Serialize;

use super::Trajectory;
use crate::point::PhasePoint;

/// Winding of a trajectory around a moving center over one time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationCount {
    pub t_start: f64,
    pub t_end: f64,
    /// Unwrapped clockwise angle swept, radians.
    pub angle: f64,
    /// Complete clockwise turns, rounded towards zero; `None` if indeterminate.
    pub count: Option<i64>,
    pub min_distance: f64,
}

const SUBSAMPLES: usize = 8;

/// Counts clockwise turns of z(t) - center(t) on each interval by continuous
/// angle unwrapping on the dense output. An interval on which the trajectory
/// comes within `tol` of the center is reported as indeterminate.
pub fn oscillation_counts<C: Fn(f64) -> PhasePoint>(
    traj: &Trajectory,
    center: C,
    intervals: &[(f64, f64)],
    tol: f64,
) -> Vec<OscillationCount> {
    intervals
        .iter()
        .map(|&(a, b)| {
            let mut times = vec![a];
            for s in &traj.steps {
                for j in 1..=SUBSAMPLES {
                    let t = s.t0 + s.h * j as f64 / SUBSAMPLES as f64;
                    if t > a && t < b {
                        times.push(t);
                    }
                }
            }
            times.push(b);
            times.sort_by(f64::total_cmp);
            let mut angle = 0.0;
            let mut min_distance = f64::INFINITY;
            let mut prev: Option<f64> = None;
            let mut covered = true;
            for &t in &times {
                let Some(z) = traj.eval(t) else {
                    covered = false;
                    break;
                };
                let c = center(t);
                let (wx, wy) = (z.x - c.x, z.y - c.y);
                min_distance = min_distance.min(wx.hypot(wy));
                let phi = wy.atan2(wx);
                if let Some(p) = prev {
                    let mut d = phi - p;
                    if d > PI {
                        d -= 2.0 * PI;
                    } else if d < -PI {
                        d += 2.0 * PI;
                    }
                    angle -= d;
                }
                prev = Some(phi);
            }
            let turns = angle / (2.0 * PI);
            let count = (covered && min_distance >= tol).then(|| {
                if turns >= 0.0 {
                    (turns + 1e-6).floor() as i64
                } else {
                    (turns - 1e-6).ceil() as i64
                }
            });
            OscillationCount { t_start: a, t_end: b, angle, count, min_distance }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowOptions, Oscillator};
    use crate::model::{EnergyFrame, Nonlinearity, RootName};
    use crate::timemap;

    #[test]
    fn one_turn_per_period_of_a_frozen_orbit() {
        let f = Nonlinearity::sqrt1p();
        let fr = EnergyFrame::new(f.clone(), 2.0).unwrap();
        let rho = 0.5 * (fr.phi_at_xs() + fr.phi_at_xu());
        let period = timemap::period_o(&fr, rho).unwrap().tau;
        let xm = fr.classify_level(rho).unwrap().root(RootName::Minus).unwrap();
        let osc = Oscillator::autonomous(f, 2.0);
        let tr = osc.integrate(PhasePoint::new(xm, 0.0), 0.0, 3.0 * period, &FlowOptions::default());
        let c = PhasePoint::new(fr.x_s(), 0.0);
        let counts = oscillation_counts(&tr, |_| c, &[(0.0, period), (0.0, 3.0 * period)], 1e-6);
        assert_eq!(counts[0].count, Some(1));
        assert_eq!(counts[1].count, Some(3));
    }

    #[test]
    fn left_branch_never_winds() {
        let f = Nonlinearity::abs();
        let fr = EnergyFrame::new(f.clone(), 2.0).unwrap();
        // Level 0: left branch through x_* = -4; start on it at x = -5.
        let z0 = PhasePoint::new(-5.0, (2.0 * (0.0 - fr.phi(-5.0))).sqrt());
        let t = timemap::tau_v(&fr, 0.0, -5.0).unwrap().tau;
        let tr = Oscillator::autonomous(f, 2.0).integrate(z0, 0.0, t, &FlowOptions::default());
        let counts = oscillation_counts(&tr, |_| PhasePoint::new(2.0, 0.0), &[(0.0, t)], 1e-6);
        assert_eq!(counts[0].count, Some(0));
    }

    #[test]
    fn passing_through_center_is_indeterminate() {
        let osc = Oscillator::autonomous(Nonlinearity::abs(), 2.0);
        let tr = osc.integrate(PhasePoint::new(2.0, 0.0), 0.0, 1.0, &FlowOptions::default());
        let counts = oscillation_counts(&tr, |_| PhasePoint::new(2.0, 0.0), &[(0.0, 1.0)], 1e-6);
        assert_eq!(counts[0].count, None);
    }
}
