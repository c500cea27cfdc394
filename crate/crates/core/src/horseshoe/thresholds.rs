use serde::Serialize;

use super::{HorseshoeError, RegionGeometry};
use crate::timemap::{period_o, tau_o, tau_u, tau_v};

/// Travel times entering the two switching-time thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdComponents {
    /// Around the left branch at level A from x_u(k2) back to itself; absent
    /// when the strip has no lower band.
    pub tau_v_a: Option<f64>,
    /// Around the outer branch at level B from `u_leg_abscissa` back to itself.
    pub tau_u_b: f64,
    pub u_leg_abscissa: f64,
    /// Along the inner annulus orbit from (b, -) to (b, +).
    pub tau_o_d: f64,
    /// Period of the inner annulus orbit.
    pub period_o_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauStars {
    pub tau1: f64,
    pub tau2: f64,
    pub m: usize,
    pub components: ThresholdComponents,
}

/// tau1* = max(tau_V(A), tau_U(B)) in the k1 frame and
/// tau2* = tau_O(D) + (m - 1) T_O(D) in the k2 frame.
///
/// For k1 = 0 the strip has no hole and its upper arc meets the outer
/// branch of level B only where E_k2 <= Phi_k2(x_u(k2)), that is for
/// x >= (B - Phi_k2(x_u(k2))) / (k2 - k1); the U leg starts there.
pub fn tau_stars(geom: &RegionGeometry, m: usize) -> Result<TauStars, HorseshoeError> {
    if m == 0 {
        return Err(HorseshoeError::Precondition("need m >= 1 windings".into()));
    }
    let (f1, f2) = (geom.frame_k1(), geom.frame_k2());
    let levels = geom.levels();
    let xu2 = f2.x_u();
    let tau_v_a = if geom.step1_labels().contains(&0) {
        Some(tau_v(f1, levels.a, xu2)?.tau)
    } else {
        None
    };
    let u_leg_abscissa = if geom.k1() == 0.0 {
        (levels.b - f2.phi_at_xu()) / (geom.k2() - geom.k1())
    } else {
        xu2
    };
    let tau_u_b = tau_u(f1, levels.b, u_leg_abscissa)?.tau;
    let tau_o_d = 2.0 * tau_o(f2, levels.d, geom.b())?.tau;
    let period_o_d = period_o(f2, levels.d)?.tau;
    let tau1 = tau_v_a.unwrap_or(0.0).max(tau_u_b);
    let tau2 = tau_o_d + (m - 1) as f64 * period_o_d;
    for (name, v) in [("tau1*", tau1), ("tau2*", tau2)] {
        if !v.is_finite() {
            return Err(HorseshoeError::Precondition(format!("{name} = {v} is not finite")));
        }
    }
    Ok(TauStars {
        tau1,
        tau2,
        m,
        components: ThresholdComponents {
            tau_v_a,
            tau_u_b,
            u_leg_abscissa,
            tau_o_d,
            period_o_d,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horseshoe::Levels;
    use crate::model::Nonlinearity;
    use std::f64::consts::PI;

    #[test]
    fn abs_example_thresholds() {
        let g = RegionGeometry::build(&Nonlinearity::abs(), 0.0, 2.0, Levels::abs_example(0.1)).unwrap();
        let ts = tau_stars(&g, 2).unwrap();
        // Harmonic right half at k = 0: from (3, +) to (3, -) on x^2 + y^2 = 16.
        let expect1 = 2.0 * (PI / 2.0 - (0.75f64).asin());
        assert!((ts.tau1 - expect1).abs() < 1e-9, "{}", ts.tau1);
        assert!(ts.tau1 < PI / 2.0);
        assert!(ts.components.tau_v_a.is_none());
        // The inner orbit dips into x < 0 only slightly; its period stays near 2 pi.
        let t = ts.components.period_o_d;
        assert!(t > 2.0 * PI && t < 2.0 * PI + 0.05, "{t}");
        assert!(ts.components.tau_o_d < t);
        assert!(ts.tau2 > 3.5 * PI && ts.tau2 < 4.0 * PI, "{}", ts.tau2);
        assert!(ts.tau1 + ts.tau2 < 4.5 * PI);
    }

    #[test]
    fn single_winding_uses_the_half_turn_only() {
        let g = RegionGeometry::build(&Nonlinearity::abs(), 0.0, 2.0, Levels::abs_example(0.1)).unwrap();
        let ts = tau_stars(&g, 1).unwrap();
        assert_eq!(ts.tau2, ts.components.tau_o_d);
        assert!(tau_stars(&g, 0).is_err());
    }

    #[test]
    fn smooth_pair_is_finite() {
        let f = Nonlinearity::sqrt1p();
        let g = RegionGeometry::build(&f, 2.0, 4.0, RegionGeometry::auto_levels(&f, 2.0, 4.0).unwrap()).unwrap();
        let ts = tau_stars(&g, 2).unwrap();
        assert!(ts.tau1 > 0.0 && ts.tau1.is_finite());
        assert!(ts.tau2 > ts.components.period_o_d);
        assert!(ts.components.tau_v_a.unwrap() > 0.0);
    }
}
