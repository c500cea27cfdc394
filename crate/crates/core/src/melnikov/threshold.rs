use std::f64::consts::PI;

use serde::Serialize;

use super::zeros::SIGN_CHANGE_EVIDENCE;
use super::{total_excursion, HomoclinicOrbit, MelnikovError};
use crate::flow::Waveform;
use crate::roots;

/// One branch of the slow-forcing threshold: p0' keeps sign `side` and size
/// at least `delta` on [s - r, s + r], and Delta(s / Omega) has sign -side
/// for all Omega < `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchWitness {
    pub side: i8,
    pub s: f64,
    pub delta: f64,
    pub r: f64,
    /// ||p0'|| / delta.
    pub ratio: f64,
    /// Solution R of delta int_0^R q~ = ||p0'|| int_R^inf q~.
    pub radius: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaThreshold {
    pub omega0: f64,
    pub upper: BranchWitness,
    pub lower: BranchWitness,
    pub evidence: String,
}

const GRID: usize = 8192;

fn branch(q: &HomoclinicOrbit, p0: &Waveform, side: f64, sup_d1: f64, total: f64) -> Result<BranchWitness, MelnikovError> {
    let d = |t: f64| side * p0.d1(t);
    let step = 2.0 * PI / GRID as f64;
    let (i_best, _) = (0..GRID)
        .map(|i| (i, d(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut s = i_best as f64 * step;
    // Polish the maximizer of side * p0' on its grid cell.
    if let Ok(r) = roots::brent(|t| side * p0.d2(t), s - step, s + step, 1e-14) {
        if d(r) >= d(s) {
            s = r;
        }
    }
    let peak = d(s);
    if !(peak > 0.0) {
        return Err(MelnikovError::Domain("forcing profile must not be constant".into()));
    }
    let delta = 0.5 * peak;
    let level = |t: f64| d(t) - delta;
    let mut r = PI;
    for dir in [1.0, -1.0] {
        let mut a = 0.0;
        while a < PI {
            let b = a + step;
            if level(s + dir * b) < 0.0 {
                let hit = roots::brent(|x| level(s + dir * x), a, b, 1e-14).unwrap_or(a);
                r = r.min(hit);
                break;
            }
            a = b;
        }
    }
    let ratio = sup_d1 / delta;
    let target = ratio / (1.0 + ratio) * total;
    let excess = |rad: f64| q.integral_q_tilde(0.0, rad) - target;
    let radius = roots::root_on_ray(excess, 0.0, 1.0, 1.0, 1e-13).map_err(|e| MelnikovError::Model(e.into()))?;
    Ok(BranchWitness { side: side as i8, s, delta, r, ratio, radius, omega: r / radius })
}

/// Largest Omega_0 delivered by the constructive slow-forcing argument:
/// for 0 < Omega < Omega_0 the Melnikov function of p0(Omega t) takes both
/// signs, at Omega alpha = s on the upper and lower branches.
pub fn omega_threshold(q: &HomoclinicOrbit, p0: &Waveform) -> Result<OmegaThreshold, MelnikovError> {
    if p0.is_constant() || p0.d1_sup_norm() == 0.0 {
        return Err(MelnikovError::Domain("forcing profile must not be constant".into()));
    }
    let sup = p0.d1_sup_norm();
    let total = total_excursion(q);
    let upper = branch(q, p0, 1.0, sup, total)?;
    let lower = branch(q, p0, -1.0, sup, total)?;
    Ok(OmegaThreshold {
        omega0: upper.omega.min(lower.omega),
        upper,
        lower,
        evidence: SIGN_CHANGE_EVIDENCE.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::delta;
    use crate::model::Nonlinearity;

    fn orbit() -> HomoclinicOrbit {
        HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 2.0).unwrap()
    }

    #[test]
    fn sine_witnesses() {
        let q = orbit();
        let th = omega_threshold(&q, &Waveform::Sin).unwrap();
        assert!(th.omega0 > 0.0 && th.omega0.is_finite());
        // p0' = cos: peak at 0, half-level at +-pi/3.
        assert!(th.upper.s.abs() < 1e-10 || (th.upper.s - 2.0 * PI).abs() < 1e-10);
        assert!((th.upper.delta - 0.5).abs() < 1e-12);
        assert!((th.upper.r - PI / 3.0).abs() < 1e-10);
        assert!((th.lower.s - PI).abs() < 1e-10);
        for w in [th.upper, th.lower] {
            let rad = w.r / w.omega;
            let lhs = w.delta * q.integral_q_tilde(0.0, rad);
            let rhs = 1.0 * q.integral_q_tilde(rad, f64::INFINITY);
            assert!((lhs - rhs).abs() < 1e-10 * lhs);
        }
    }

    #[test]
    fn below_threshold_delta_has_the_claimed_signs() {
        let q = orbit();
        let th = omega_threshold(&q, &Waveform::Sin).unwrap();
        for frac in [0.9, 0.5] {
            let omega = frac * th.omega0;
            let up = delta(&q, &Waveform::Sin, omega, th.upper.s / omega, 0.0).unwrap().value;
            let lo = delta(&q, &Waveform::Sin, omega, th.lower.s / omega, 0.0).unwrap().value;
            assert!(up < 0.0 && lo > 0.0, "omega {omega}: {up} {lo}");
        }
    }

    #[test]
    fn scaling_the_profile_rescales_witnesses_only() {
        let q = orbit();
        let a = omega_threshold(&q, &Waveform::Sin).unwrap();
        let b = omega_threshold(&q, &Waveform::Fourier { cos: vec![], sin: vec![2.0] }).unwrap();
        assert!((a.omega0 - b.omega0).abs() < 1e-9 * a.omega0);
        assert!((b.upper.delta - 2.0 * a.upper.delta).abs() < 1e-9);
    }

    #[test]
    fn constant_profile_rejected() {
        let q = orbit();
        assert!(omega_threshold(&q, &Waveform::Zero).is_err());
        assert!(omega_threshold(&q, &Waveform::Constant(1.0)).is_err());
    }
}
