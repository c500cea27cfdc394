use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PoincareMap;
use crate::point::PhasePoint;

/// Initial conditions (u0, y0) with u0 evenly spaced on [u0_min, u0_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcLine {
    pub u0_min: f64,
    pub u0_max: f64,
    pub count: usize,
    pub y0: f64,
}

impl IcLine {
    pub fn point(&self, i: usize) -> PhasePoint {
        let x = if self.count <= 1 {
            self.u0_min
        } else {
            self.u0_min + (self.u0_max - self.u0_min) * i as f64 / (self.count - 1) as f64
        };
        PhasePoint::new(x, self.y0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterFlag {
    Ok,
    Blowup,
}

impl ScatterFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Blowup => "blowup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterRow {
    pub ic_index: usize,
    pub iter: usize,
    pub x: f64,
    pub y: f64,
    pub flag: ScatterFlag,
}

/// Poincare iterates 0..=n_iter of every initial condition, ordered by
/// (ic_index, iter). An orbit that fails ends with one `blowup` row holding
/// the last state reached.
pub fn scatter(map: &PoincareMap, ic: &IcLine, n_iter: usize) -> Vec<ScatterRow> {
    let per_ic: Vec<Vec<ScatterRow>> = (0..ic.count.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rows = Vec::new();
            let mut z = ic.point(i);
            rows.push(ScatterRow { ic_index: i, iter: 0, x: z.x, y: z.y, flag: ScatterFlag::Ok });
            for it in 1..=n_iter {
                let adv = map.oscillator().advance(z, 0.0, map.period(), map.options());
                match adv.into_result() {
                    Ok(next) => {
                        z = next;
                        rows.push(ScatterRow { ic_index: i, iter: it, x: z.x, y: z.y, flag: ScatterFlag::Ok });
                    }
                    Err(_) => {
                        rows.push(ScatterRow {
                            ic_index: i,
                            iter: it,
                            x: adv.point.x,
                            y: adv.point.y,
                            flag: ScatterFlag::Blowup,
                        });
                        break;
                    }
                }
            }
            rows
        })
        .collect();
    per_ic.into_iter().flatten().collect()
}

/// Seed rectangle for the fixed-point search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ScanWindow {
    fn contains(&self, z: PhasePoint) -> bool {
        z.x >= self.x_min && z.x <= self.x_max && z.y >= self.y_min && z.y <= self.y_max
    }

    fn seeds(&self) -> Vec<PhasePoint> {
        let lin = |a: f64, b: f64, n: usize, i: usize| {
            if n <= 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny.max(1) {
            for i in 0..self.nx.max(1) {
                out.push(PhasePoint::new(
                    lin(self.x_min, self.x_max, self.nx, i),
                    lin(self.y_min, self.y_max, self.ny, j),
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub point: PhasePoint,
    pub residual: f64,
    pub seed_index: usize,
}

const DEDUP_RADIUS: f64 = 1e-6;
const ACCEPT_RESIDUAL: f64 = 1e-9;

fn residual_vec(map: &PoincareMap, z: PhasePoint) -> Option<[f64; 2]> {
    let w = map.apply(z).ok()?;
    Some([w.x - z.x, w.y - z.y])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn solve2(m: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|v| v * v).sum::<f64>();
    if !(det.abs() > 1e-10 * scale) {
        return None;
    }
    Some([(r[0] * m[1][1] - r[1] * m[0][1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det])
}

fn fd_jacobian(map: &PoincareMap, z: PhasePoint) -> Option<[[f64; 2]; 2]> {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let h = 1e-6 * (1.0 + if c == 0 { z.x.abs() } else { z.y.abs() });
        let mut zp = z;
        let mut zm = z;
        if c == 0 {
            zp.x += h;
            zm.x -= h;
        } else {
            zp.y += h;
            zm.y -= h;
        }
        let gp = residual_vec(map, zp)?;
        let gm = residual_vec(map, zm)?;
        for r in 0..2 {
            j[r][c] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Some(j)
}

/// Damped Newton on G(z) = Psi(z) - z from one seed. When the
/// finite-difference Jacobian is near-singular the step falls back to a
/// Broyden secant update of the previous Jacobian.
pub fn newton_fixed_point(map: &PoincareMap, seed: PhasePoint, max_step: f64) -> Option<(PhasePoint, f64)> {
    let mut z = seed;
    let mut g = residual_vec(map, z)?;
    let mut prev: Option<([[f64; 2]; 2], PhasePoint, [f64; 2])> = None;
    for _ in 0..40 {
        let r = norm(g);
        if r < 1e-11 {
            break;
        }
        let fd = fd_jacobian(map, z)?;
        let mut delta = solve2(fd, [-g[0], -g[1]]);
        let mut jac = fd;
        if delta.is_none() {
            if let Some((b, zp, gp)) = prev {
                let dz = [z.x - zp.x, z.y - zp.y];
                let dg = [g[0] - gp[0], g[1] - gp[1]];
                let dd = dz[0] * dz[0] + dz[1] * dz[1];
                if dd > 0.0 {
                    let mut bn = b;
                    for i in 0..2 {
                        let corr = dg[i] - (b[i][0] * dz[0] + b[i][1] * dz[1]);
                        for k in 0..2 {
                            bn[i][k] += corr * dz[k] / dd;
                        }
                    }
                    jac = bn;
                    delta = solve2(bn, [-g[0], -g[1]]);
                }
            }
        }
        let mut d = delta?;
        let len = norm(d);
        if len > max_step {
            d = [d[0] * max_step / len, d[1] * max_step / len];
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = PhasePoint::new(z.x + lambda * d[0], z.y + lambda * d[1]);
            if let Some(gc) = residual_vec(map, cand) {
                if norm(gc) < r {
                    accepted = Some((cand, gc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (zn, gn) = accepted?;
        prev = Some((jac, z, g));
        z = zn;
        g = gn;
    }
    let r = norm(g);
    (r < ACCEPT_RESIDUAL).then_some((z, r))
}

/// Fixed points of the period map seeded from a grid over `window`,
/// deduplicated within 1e-6 and restricted to the window. The result is
/// independent of the worker count.
pub fn fixed_point_scan(map: &PoincareMap, window: &ScanWindow) -> Vec<FixedPoint> {
    let seeds = window.seeds();
    let diag = (window.x_max - window.x_min).hypot(window.y_max - window.y_min);
    let max_step = (0.25 * diag).max(1e-3);
    let found: Vec<Option<(PhasePoint, f64)>> = seeds
        .par_iter()
        .map(|&s| newton_fixed_point(map, s, max_step))
        .collect();
    let mut out: Vec<FixedPoint> = Vec::new();
    for (i, hit) in found.into_iter().enumerate() {
        let Some((z, r)) = hit else { continue };
        if !window.contains(z) {
            continue;
        }
        if out.iter().any(|p| p.point.dist(z) < DEDUP_RADIUS) {
            continue;
        }
        out.push(FixedPoint { point: z, residual: r, seed_index: i });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowOptions, Forcing, Oscillator, Waveform};
    use crate::model::Nonlinearity;

    fn low_amplitude_map(k: f64, eps: f64) -> PoincareMap {
        let osc = Oscillator::new(
            Nonlinearity::sqrt1p(),
            Forcing::Periodic { k, eps, omega: 10.0, p0: Waveform::Sin, phase: 0.0 },
            0.0,
        )
        .unwrap();
        PoincareMap::new(osc, FlowOptions::default()).unwrap()
    }

    #[test]
    fn single_ic_without_iterations_is_one_row() {
        let rows = scatter(&low_amplitude_map(2.0, 0.01), &IcLine { u0_min: 0.0, u0_max: 1.0, count: 1, y0: 0.0 }, 0);
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].x, rows[0].flag), (0.0, ScatterFlag::Ok));
    }

    #[test]
    fn scatter_is_ordered_and_flags_escapes() {
        let rows = scatter(&low_amplitude_map(-0.5, 0.01), &IcLine { u0_min: -1.0, u0_max: 1.0, count: 3, y0: 0.0 }, 400);
        let mut last = (0, 0);
        for r in &rows[1..] {
            assert!((r.ic_index, r.iter) > last);
            last = (r.ic_index, r.iter);
        }
        assert!(rows.iter().any(|r| r.flag == ScatterFlag::Blowup));
    }

    #[test]
    fn autonomous_equilibria_are_fixed_points() {
        let map = low_amplitude_map(2.0, 0.0);
        let w = ScanWindow { x_min: -4.0, x_max: 4.0, y_min: -1.0, y_max: 1.0, nx: 5, ny: 3 };
        let fps = fixed_point_scan(&map, &w);
        let s = 8f64.sqrt();
        assert!(fps.iter().any(|p| p.point.dist(PhasePoint::new(-s, 0.0)) < 1e-6));
        assert!(fps.iter().any(|p| p.point.dist(PhasePoint::new(s, 0.0)) < 1e-6));
    }
}
