use std::f64::consts::PI;

use serde::Serialize;

use crate::flow::Waveform;
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleZero {
    pub alpha: f64,
    /// Central-difference derivative at the zero.
    pub slope: f64,
    pub slope_sign: i8,
}

/// Sign structure of a periodic function sampled on one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub period: f64,
    pub grid: usize,
    pub max_abs: f64,
    pub simple_zeros: Vec<SimpleZero>,
    pub sign_change: bool,
    pub identically_zero: bool,
    /// Which horseshoe hypotheses the samples support. Floating-point
    /// evidence, not a proof.
    pub evidence: Vec<String>,
}

pub const SIMPLE_ZERO_EVIDENCE: &str =
    "numerical evidence for the simple-zero hypothesis of the Melnikov criterion (Smale horseshoe for an iterate of the period map)";
pub const SIGN_CHANGE_EVIDENCE: &str =
    "numerical evidence for the sign-change hypothesis of the degree-based Melnikov criterion (topological horseshoe for an iterate of the period map)";

/// Brackets sign changes of `g` on an n-point grid over [0, period),
/// refines each by Brent and estimates g' by central differences. `scale` is
/// the natural size of g; max|g| < zero_tol * scale counts as identically zero.
pub fn detect_zeros<G: Fn(f64) -> f64>(g: G, period: f64, n: usize, scale: f64, zero_tol: f64) -> ZeroReport {
    let n = n.max(64);
    let alphas: Vec<f64> = (0..n).map(|i| period * i as f64 / n as f64).collect();
    let vals: Vec<f64> = alphas.iter().map(|&a| g(a)).collect();
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let identically_zero = max_abs < zero_tol * scale.max(f64::MIN_POSITIVE);
    let mut simple_zeros = Vec::new();
    let mut sign_change = false;
    if !identically_zero {
        let floor = 1e-12 * max_abs;
        let h = 1e-5 * period;
        for i in 0..n {
            let (a, b) = (alphas[i], if i + 1 == n { period } else { alphas[i + 1] });
            let (ga, gb) = (vals[i], vals[(i + 1) % n]);
            let root = if ga.abs() <= floor {
                // Zero on a grid point: claim it once, from the interval it starts.
                let prev = vals[(i + n - 1) % n];
                (prev.signum() * gb.signum() < 0.0).then_some(a)
            } else if gb.abs() > floor && ga.signum() != gb.signum() {
                roots::brent(&g, a, b, 1e-14 * period.max(1.0)).ok()
            } else {
                None
            };
            if let Some(z) = root {
                sign_change = true;
                let slope = (g(z + h) - g(z - h)) / (2.0 * h);
                // Simple if the slope is resolvable against the sampled size.
                if slope.abs() * period > 1e-6 * max_abs {
                    simple_zeros.push(SimpleZero { alpha: z, slope, slope_sign: slope.signum() as i8 });
                }
            }
        }
    }
    let mut evidence = Vec::new();
    if !simple_zeros.is_empty() {
        evidence.push(SIMPLE_ZERO_EVIDENCE.to_string());
    }
    if !identically_zero && sign_change {
        evidence.push(SIGN_CHANGE_EVIDENCE.to_string());
    }
    ZeroReport { period, grid: n, max_abs, simple_zeros, sign_change, identically_zero, evidence }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub theta: f64,
    pub second_derivative: f64,
}

pub const SLOW_FORCING_EVIDENCE: &str =
    "numerical evidence for the nondegenerate-critical-point hypothesis of the slow-forcing Melnikov criterion";

/// Nondegenerate critical points of p0 on [0, 2 pi): p0' = 0 != p0''.
pub fn critical_points(p0: &Waveform, n: usize) -> Vec<CriticalPoint> {
    let n = n.max(64);
    let scale = p0.d1_sup_norm();
    if scale == 0.0 {
        return Vec::new();
    }
    let report = detect_zeros(|t| p0.d1(t), 2.0 * PI, n, scale, 1e-14);
    report
        .simple_zeros
        .iter()
        .map(|z| CriticalPoint { theta: z.alpha, second_derivative: p0.d2(z.alpha) })
        .filter(|c| c.second_derivative.abs() > 1e-8 * scale)
        .collect()
}
