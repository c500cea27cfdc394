//! Travel times along energy levels,
//! tau(rho; x1, x2) = integral over [x1, x2] of ds / sqrt(2 (rho - Phi_k(s))).
//!
//! Each half of the interval is integrated in the variable sigma with
//! s = endpoint +- sigma^2, which turns a square-root turning point into a
//! smooth integrand. The gap rho - Phi_k(s) is always measured from the
//! nearer endpoint, so it stays accurate where it is small.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EnergyFrame, LevelKind, ModelError, RootName};
use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeMapError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("time map diverges: the level passes through the saddle at x = {at}")]
    Divergent { at: f64 },
    #[error("quadrature did not converge (estimate {value}, error {error})")]
    NotConverged { value: f64, error: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which of the named time maps a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeMapKind {
    Generic,
    O,
    V,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMapOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for TimeMapOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 4000,
        }
    }
}

/// A travel time with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeEstimate {
    pub tau: f64,
    pub err: f64,
}

impl TimeEstimate {
    fn scaled(self, c: f64) -> Self {
        Self {
            tau: c * self.tau,
            err: c.abs() * self.err,
        }
    }
}

/// Relative threshold below which rho - Phi_k(endpoint) counts as a turning point.
const TURN_REL: f64 = 1e-10;

fn turn_tol(rho: f64) -> f64 {
    TURN_REL * rho.abs().max(1.0)
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

enum Endpoint {
    Turning,
    Open(f64),
}

/// Half-interval integral from `end` towards `mid` in the sigma variable.
fn half_integral(
    frame: &EnergyFrame,
    end: f64,
    end_kind: &Endpoint,
    mid: f64,
    opts: &TimeMapOptions,
) -> Result<quad::Quadrature, TimeMapError> {
    let dir = (mid - end).signum();
    let g_end = match end_kind {
        Endpoint::Turning => 0.0,
        Endpoint::Open(g) => *g,
    };
    let slope = frame.phi_prime(end).abs();
    let sigma_max = (mid - end).abs().sqrt();
    let integrand = |sigma: f64| {
        if sigma == 0.0 {
            return match end_kind {
                Endpoint::Turning => 2.0 / (2.0 * slope).sqrt(),
                Endpoint::Open(_) => 0.0,
            };
        }
        let mut gap = g_end - frame.phi_increment(end, dir * sigma * sigma);
        if !(gap > 0.0) {
            let lin = slope * sigma * sigma;
            if matches!(end_kind, Endpoint::Turning) && sigma * sigma < 1e-6 * sigma_max * sigma_max && lin > 0.0 {
                gap = lin;
            } else {
                return f64::NAN;
            }
        }
        2.0 * sigma / (2.0 * gap).sqrt()
    };
    let q = quad::integrate(integrand, 0.0, sigma_max, opts.abs_tol, opts.rel_tol, opts.max_panels);
    if !q.value.is_finite() {
        return Err(TimeMapError::Domain(format!(
            "rho - Phi_k vanishes inside the interval near x = {end} (estimate {})",
            q.value
        )));
    }
    Ok(q)
}

/// Signed travel time from x1 to x2 along E_k = rho with default options.
pub fn tau(frame: &EnergyFrame, rho: f64, x1: f64, x2: f64) -> Result<TimeEstimate, TimeMapError> {
    tau_with(frame, rho, x1, x2, &TimeMapOptions::default())
}

/// Signed travel time from x1 to x2 along E_k = rho.
pub fn tau_with(
    frame: &EnergyFrame,
    rho: f64,
    x1: f64,
    x2: f64,
    opts: &TimeMapOptions,
) -> Result<TimeEstimate, TimeMapError> {
    if x1 == x2 {
        return Ok(TimeEstimate { tau: 0.0, err: 0.0 });
    }
    if x2 < x1 {
        return tau_with(frame, rho, x2, x1, opts).map(|t| t.scaled(-1.0));
    }
    let tol = turn_tol(rho);
    let classify_end = |x: f64, inward: f64| -> Result<Endpoint, TimeMapError> {
        let g = rho - frame.phi(x);
        if g < -tol {
            return Err(TimeMapError::Domain(format!(
                "level {rho} is not reached at x = {x} (rho - Phi = {g})"
            )));
        }
        if g > tol {
            return Ok(Endpoint::Open(g));
        }
        if same_point(x, frame.x_u()) {
            return Err(TimeMapError::Divergent { at: x });
        }
        // The gap must open towards the interior: Phi decreasing inwards.
        if frame.phi_prime(x) * inward >= 0.0 {
            return Err(TimeMapError::Domain(format!(
                "x = {x} is a turning point but the level does not extend into the interval"
            )));
        }
        Ok(Endpoint::Turning)
    };
    let e1 = classify_end(x1, 1.0)?;
    let e2 = classify_end(x2, -1.0)?;
    let xu = frame.x_u();
    if xu > x1 && xu < x2 {
        let g = rho - frame.phi_at_xu();
        if g < -tol {
            return Err(TimeMapError::Domain(format!(
                "rho - Phi_k has an interior zero: level {rho} lies below the saddle value"
            )));
        }
        if g <= tol {
            return Err(TimeMapError::Divergent { at: xu });
        }
    }
    let mid = 0.5 * (x1 + x2);
    let left = half_integral(frame, x1, &e1, mid, opts)?;
    let right = half_integral(frame, x2, &e2, mid, opts)?;
    let value = left.value + right.value;
    let err = left.error + right.error;
    if !(left.converged && right.converged) {
        return Err(TimeMapError::NotConverged { value, error: err });
    }
    Ok(TimeEstimate { tau: value, err })
}

fn require_band(frame: &EnergyFrame, rho: f64) -> Result<(f64, f64), TimeMapError> {
    if frame.k() == 0.0 || !(rho > frame.phi_at_xs() && rho < frame.phi_at_xu()) {
        return Err(TimeMapError::Domain(format!(
            "level {rho} is outside the closed-orbit band ({}, {})",
            frame.phi_at_xs(),
            frame.phi_at_xu()
        )));
    }
    let c = frame.classify_level(rho)?;
    if c.kind != LevelKind::ThreeRoots {
        return Err(TimeMapError::Domain(format!("level {rho} carries no closed orbit")));
    }
    Ok((c.root(RootName::Minus).unwrap(), c.root(RootName::Plus).unwrap()))
}

/// Time from (x_-(rho), 0) to abscissa r along the closed orbit, upper half.
pub fn tau_o(frame: &EnergyFrame, rho: f64, r: f64) -> Result<TimeEstimate, TimeMapError> {
    let (xm, xp) = require_band(frame, rho)?;
    if r < xm || r > xp {
        return Err(TimeMapError::Domain(format!(
            "r = {r} is outside [x_-, x_+] = [{xm}, {xp}]"
        )));
    }
    tau(frame, rho, xm, r)
}

/// Period of the closed orbit at level rho.
pub fn period_o(frame: &EnergyFrame, rho: f64) -> Result<TimeEstimate, TimeMapError> {
    let (xm, xp) = require_band(frame, rho)?;
    Ok(tau(frame, rho, xm, xp)?.scaled(2.0))
}

/// Turning root of the left branch: x_*(rho).
fn lower_star(frame: &EnergyFrame, rho: f64) -> Result<f64, TimeMapError> {
    if frame.k() == 0.0 {
        if !(rho < 0.0) {
            return Err(TimeMapError::Domain(format!("no left branch at level {rho} for k = 0")));
        }
    } else if !(rho < frame.phi_at_xu()) {
        return Err(TimeMapError::Domain(format!(
            "no left branch at level {rho}: need rho < {}",
            frame.phi_at_xu()
        )));
    }
    Ok(frame.root_left(rho)?)
}

/// Turning root of the outer branch: x^*(rho).
fn upper_star(frame: &EnergyFrame, rho: f64) -> Result<f64, TimeMapError> {
    let floor = if frame.k() == 0.0 { 0.0 } else { frame.phi_at_xu() };
    if !(rho > floor) {
        return Err(TimeMapError::Domain(format!(
            "no outer branch at level {rho}: need rho > {floor}"
        )));
    }
    Ok(frame.root_right(rho)?)
}

/// Time from (r, +) to (r, -) around the left branch, 2 tau(rho; r, x_*).
pub fn tau_v(frame: &EnergyFrame, rho: f64, r: f64) -> Result<TimeEstimate, TimeMapError> {
    let xt = lower_star(frame, rho)?;
    if r > xt && !same_point(r, xt) {
        return Err(TimeMapError::Domain(format!("r = {r} must not exceed x_* = {xt}")));
    }
    if same_point(r, xt) {
        return Ok(TimeEstimate { tau: 0.0, err: 0.0 });
    }
    Ok(tau(frame, rho, r, xt)?.scaled(2.0))
}

/// Time from (r, +) to (r, -) around the outer branch, 2 tau(rho; r, x^*).
pub fn tau_u(frame: &EnergyFrame, rho: f64, r: f64) -> Result<TimeEstimate, TimeMapError> {
    let xt = upper_star(frame, rho)?;
    if r > xt && !same_point(r, xt) {
        return Err(TimeMapError::Domain(format!("r = {r} must not exceed x^* = {xt}")));
    }
    if same_point(r, xt) {
        return Ok(TimeEstimate { tau: 0.0, err: 0.0 });
    }
    Ok(tau(frame, rho, r, xt)?.scaled(2.0))
}

/// Dispatches on a time-map kind; `x2` is only used by `Generic`.
pub fn evaluate(
    frame: &EnergyFrame,
    kind: TimeMapKind,
    rho: f64,
    r: f64,
    x2: Option<f64>,
) -> Result<TimeEstimate, TimeMapError> {
    match kind {
        TimeMapKind::Generic => {
            let x2 = x2.ok_or_else(|| TimeMapError::Domain("generic time map needs x2".into()))?;
            tau(frame, rho, r, x2)
        }
        TimeMapKind::O => tau_o(frame, rho, r),
        TimeMapKind::V => tau_v(frame, rho, r),
        TimeMapKind::U => tau_u(frame, rho, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Nonlinearity;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn frame(name: &str, k: f64) -> EnergyFrame {
        EnergyFrame::new(Nonlinearity::from_name(name).unwrap(), k).unwrap()
    }

    #[test]
    fn golden_quarter_circle() {
        let fr = frame("abs", 0.0);
        let t = tau(&fr, 8.0, 8f64.sqrt(), 4.0).unwrap();
        assert!((t.tau - PI / 4.0).abs() < 1e-10);
        let u = tau_u(&fr, 8.0, 8f64.sqrt()).unwrap();
        assert!((u.tau - PI / 2.0).abs() < 1e-10);
        assert_eq!(tau_u(&fr, 8.0, 4.0).unwrap().tau, 0.0);
        assert!(tau_u(&fr, 8.0, 4.5).is_err());
    }

    #[test]
    fn empty_interval_and_divergence() {
        let fr = frame("abs", 2.0);
        assert_eq!(tau(&fr, 1.0, 0.3, 0.3).unwrap().tau, 0.0);
        assert!(matches!(tau(&fr, 2.0, -2.0, 0.0), Err(TimeMapError::Divergent { .. })));
        assert!(matches!(tau(&fr, 2.0, -3.0, 0.0), Err(TimeMapError::Divergent { .. })));
    }

    #[test]
    fn interior_zero_is_a_domain_error() {
        let fr = frame("abs", 2.0);
        // Level 0 dips below Phi between x_* = -4 and x_- = 0.
        assert!(matches!(tau(&fr, 0.0, -5.0, 1.0), Err(TimeMapError::Domain(_))));
        assert!(matches!(tau(&fr, 0.0, -4.0, -1.0), Err(TimeMapError::Domain(_))));
    }

    #[test]
    fn abs_left_branch_against_closed_form() {
        // 2 * integral_{-5}^{-4} ds / sqrt(s^2 + 4s) = 2 acosh-type antiderivative.
        let fr = frame("abs", 2.0);
        let anti = |s: f64| -((-s - 2.0) + ((s + 2.0) * (s + 2.0) - 4.0).sqrt()).ln();
        let exact = 2.0 * (anti(-4.0) - anti(-5.0));
        let v = tau_v(&fr, 0.0, -5.0).unwrap();
        assert!((v.tau - exact).abs() < 1e-9 * exact, "{} vs {exact}", v.tau);
        assert_eq!(tau_v(&fr, 0.0, -4.0).unwrap().tau, 0.0);
        assert!(tau_v(&fr, 0.0, -3.0).is_err());
    }

    #[test]
    fn sqrt1p_left_branch_at_center_level() {
        let fr = frame("sqrt1p", 2.0);
        let rho = fr.phi_at_xs();
        let xs = fr.root_left(rho).unwrap();
        assert!(xs < -4.0);
        let oracle = quad::integrate(
            |s| 1.0 / (2.0 * (rho - fr.phi(s))).sqrt(),
            -8.0,
            xs - 1e-12,
            1e-12,
            1e-9,
            20000,
        );
        let v = tau_v(&fr, rho, -8.0).unwrap();
        assert!(v.tau > 0.0 && (v.tau - 2.0 * oracle.value).abs() < 1e-4 * v.tau);
        assert!(tau_v(&fr, rho, -4.0).is_err());
    }

    #[test]
    fn outer_branch_from_larger_saddle() {
        let fr = frame("sqrt1p", 2.0);
        let xu4 = frame("sqrt1p", 4.0).x_u();
        let u = tau_u(&fr, fr.phi_at_xu() + 1.0, xu4).unwrap();
        assert!(u.tau.is_finite() && u.tau > 0.0);
    }

    #[test]
    fn isochronous_abs_orbits() {
        for k in [1.0, 2.0, 3.5] {
            let fr = frame("abs", k);
            for frac in [0.1, 0.5, 0.9] {
                let rho = fr.phi_at_xs() * frac;
                let c = fr.classify_level(rho).unwrap();
                if c.root(RootName::Minus).unwrap() <= 0.0 {
                    continue;
                }
                let p = period_o(&fr, rho).unwrap();
                assert!((p.tau - 2.0 * PI).abs() < 1e-9, "k={k} rho={rho}: {}", p.tau);
            }
        }
    }

    #[test]
    fn period_tends_to_linearized_value_at_center() {
        let fr = frame("sqrt1p", 2.0);
        let lim = 2.0 * PI / (8f64.sqrt() / 3.0).sqrt();
        let p = period_o(&fr, fr.phi_at_xs() + 1e-8).unwrap();
        assert!((p.tau - lim).abs() < 1e-4);
        assert!((lim - 6.47).abs() < 5e-3);
    }

    #[test]
    fn period_grows_towards_homoclinic() {
        let fr = frame("abs", 2.0);
        let mut last = 0.0;
        for n in 1..=10 {
            let p = period_o(&fr, 2.0 - 10f64.powi(-n)).unwrap().tau;
            assert!(p > last);
            last = p;
        }
        assert!(period_o(&fr, 2.0).is_err());
    }

    #[test]
    fn closed_orbit_band_is_enforced() {
        let fr = frame("abs", 2.0);
        assert!(tau_o(&fr, 3.0, 1.0).is_err());
        assert!(period_o(&frame("abs", 0.0), -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn additivity(t in 0.05f64..0.95, a in 0.05f64..0.95, b in 0.05f64..0.95) {
            prop_assume!((a - b).abs() > 1e-3);
            let fr = frame("sqrt1p", 2.0);
            let rho = fr.phi_at_xs() + t * (fr.phi_at_xu() - fr.phi_at_xs());
            let c = fr.classify_level(rho).unwrap();
            let (xm, xp) = (c.root(RootName::Minus).unwrap(), c.root(RootName::Plus).unwrap());
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p = xm + lo * (xp - xm);
            let q = xm + hi * (xp - xm);
            let whole = tau(&fr, rho, xm, q).unwrap();
            let s1 = tau(&fr, rho, xm, p).unwrap();
            let s2 = tau(&fr, rho, p, q).unwrap();
            prop_assert!((whole.tau - s1.tau - s2.tau).abs() <= 2.0 * 1e-10 * whole.tau + 1e-12);
        }
    }
}
