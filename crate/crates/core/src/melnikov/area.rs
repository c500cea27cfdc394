use serde::Serialize;

use super::MelnikovError;
use crate::model::{EnergyFrame, Nonlinearity};
use crate::quad::{self, CompensatedSum};

/// Area enclosed by the homoclinic loop of u'' + f(u) = k,
/// S = 2 int_{x_u}^{x_h} sqrt(2 (Phi(x_u) - Phi(x))) dx.
pub fn loop_area_at(f: &Nonlinearity, k: f64) -> Result<f64, MelnikovError> {
    if !(k > 0.0) {
        return Err(MelnikovError::Domain(format!("need k > 0, got {k}")));
    }
    let fr = EnergyFrame::new(f.clone(), k)?;
    let (x_u, x_h) = (fr.x_u(), fr.x_h().expect("k > 0 has a loop"));
    let mid = 0.5 * (x_u + x_h);
    let mut acc = CompensatedSum::new();
    // Left half: the gap vanishes quadratically at x_u, so sqrt(gap) is smooth.
    let mut cuts = vec![x_u];
    cuts.extend(f.breakpoints().iter().copied().filter(|&b| b > x_u && b < mid));
    cuts.push(mid);
    for w in cuts.windows(2) {
        let g = |x: f64| (2.0 * (-fr.phi_increment(x_u, x - x_u)).max(0.0)).sqrt();
        acc.add(quad::integrate(g, w[0], w[1], 1e-15, 1e-13, 2000).value);
    }
    // Right half in x = x_h - sigma^2.
    let mut scuts = vec![0.0];
    let mut inner: Vec<f64> = f
        .breakpoints()
        .iter()
        .filter(|&&b| b > mid && b < x_h)
        .map(|&b| (x_h - b).sqrt())
        .collect();
    inner.sort_by(f64::total_cmp);
    scuts.extend(inner);
    scuts.push((x_h - mid).sqrt());
    for w in scuts.windows(2) {
        let g = |s: f64| 2.0 * s * (2.0 * (-fr.phi_increment(x_h, -s * s)).max(0.0)).sqrt();
        acc.add(quad::integrate(g, w[0], w[1], 1e-15, 1e-13, 2000).value);
    }
    Ok(2.0 * acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaSample {
    pub theta: f64,
    pub k: f64,
    pub area: f64,
}

/// S(theta) = loop area for the frozen level k = p(theta).
pub fn loop_area<P: Fn(f64) -> f64>(f: &Nonlinearity, p: P, thetas: &[f64]) -> Result<Vec<AreaSample>, MelnikovError> {
    thetas
        .iter()
        .map(|&theta| {
            let k = p(theta);
            if !(k > 0.0) {
                return Err(MelnikovError::Domain(format!("p({theta}) = {k} must be positive")));
            }
            Ok(AreaSample { theta, k, area: loop_area_at(f, k)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

/// An interval [theta_minus, theta_plus] around one extremum of S with
/// S' > 0 > S' (max) or S' < 0 < S' (min) at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaInterval {
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub theta_extremum: f64,
    pub extremum: Extremum,
    pub slope_minus: f64,
    pub slope_plus: f64,
}

/// Intervals around the alternating extrema of S, from samples on a uniform
/// grid covering one period [theta_0, theta_0 + T). The pattern repeats with
/// period T. Nearly constant S yields no intervals.
pub fn propose_intervals(samples: &[AreaSample]) -> Vec<AreaInterval> {
    let n = samples.len();
    if n < 4 {
        return Vec::new();
    }
    let h = samples[1].theta - samples[0].theta;
    let period = h * n as f64;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.area), b.max(s.area)));
    if hi - lo <= 1e-10 * hi.abs().max(1.0) {
        return Vec::new();
    }
    let area = |i: isize| samples[i.rem_euclid(n as isize) as usize].area;
    // Slope at the half-grid point between i and i + 1.
    let slope: Vec<f64> = (0..n as isize).map(|i| (area(i + 1) - area(i)) / h).collect();
    let floor = 1e-9 * (hi - lo) / period;
    let sign = |v: f64| if v > floor { 1 } else if v < -floor { -1 } else { 0 };
    // Extrema sit between consecutive half-grid slopes of opposite sign.
    let mut ext: Vec<(usize, Extremum, f64)> = Vec::new();
    let mut last: Option<(usize, i32)> = None;
    let first_nonzero = (0..n).find(|&i| sign(slope[i]) != 0);
    let Some(start) = first_nonzero else { return Vec::new() };
    for off in 1..=n {
        let i = (start + off) % n;
        let sg = sign(slope[i]);
        if sg == 0 {
            continue;
        }
        let (pi, ps) = last.unwrap_or((start, sign(slope[start])));
        if sg != ps {
            let kind = if ps > 0 { Extremum::Max } else { Extremum::Min };
            // Linear zero of the slope between half-grid points pi and i.
            let gap = ((i + n - pi) % n).max(1) as f64;
            let frac = slope[pi] / (slope[pi] - slope[i]);
            let theta = samples[pi].theta + h * (0.5 + frac * gap);
            ext.push((pi, kind, theta));
        }
        last = Some((i, sg));
    }
    if ext.is_empty() {
        return Vec::new();
    }
    ext.sort_by(|a, b| a.2.rem_euclid(period).total_cmp(&b.2.rem_euclid(period)));
    let m = ext.len();
    let base = samples[0].theta;
    let wrap = |t: f64| base + (t - base).rem_euclid(period);
    (0..m)
        .map(|j| {
            let (_, kind, th) = ext[j];
            let prev = ext[(j + m - 1) % m].2;
            let next = ext[(j + 1) % m].2;
            let dist = |a: f64, b: f64| {
                let d = (b - a).rem_euclid(period);
                if d == 0.0 {
                    period
                } else {
                    d
                }
            };
            let w_minus = 0.25 * dist(prev, th);
            let w_plus = 0.25 * dist(th, next);
            let (tm, tp) = (th - w_minus, th + w_plus);
            let s_at = |t: f64| {
                let u = (wrap(t) - base) / h;
                let i = u.floor() as isize;
                let fr = u - i as f64;
                let c = |k: isize| slope[k.rem_euclid(n as isize) as usize];
                // Slopes live at half-grid points.
                if fr >= 0.5 {
                    c(i) + (c(i + 1) - c(i)) * (fr - 0.5)
                } else {
                    c(i - 1) + (c(i) - c(i - 1)) * (fr + 0.5)
                }
            };
            AreaInterval {
                theta_minus: wrap(tm),
                theta_plus: wrap(tm) + (tp - tm),
                theta_extremum: wrap(th),
                extremum: kind,
                slope_minus: s_at(tm),
                slope_plus: s_at(tp),
            }
        })
        .collect()
}
