use serde::{Deserialize, Serialize};

use super::stretch::{crossings, scan, ScanSettings};
use super::{Certification, HorseshoeError, Placement, RectangleId, RegionGeometry, Side, Stage, StageMap, StepSchedule};
use crate::flow::FlowOptions;
use crate::point::PhasePoint;
use crate::roots;

/// A periodic word over the certified alphabet. Symbol s stands for the
/// step-one set `step1_labels[s / m]` followed by winding window `s % m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Itinerary {
    pub symbols: Vec<usize>,
    #[serde(default = "periodic_default")]
    pub periodic: bool,
}

fn periodic_default() -> bool {
    true
}

impl Itinerary {
    pub fn periodic(symbols: Vec<usize>) -> Self {
        Self { symbols, periodic: true }
    }

    pub fn period(&self) -> usize {
        self.symbols.len()
    }

    /// (step-one label, winding) pairs, checked against an alphabet of
    /// step-one labels times m windings.
    pub fn decode(&self, step1_labels: &[usize], m: usize) -> Result<Vec<(usize, usize)>, HorseshoeError> {
        let size = step1_labels.len() * m;
        self.symbols
            .iter()
            .map(|&s| {
                if s >= size {
                    Err(HorseshoeError::Alphabet { symbol: s, size })
                } else {
                    Ok((step1_labels[s / m], s % m))
                }
            })
            .collect()
    }
}

/// Psi = Psi2 o Psi1, the period map of the switched system.
#[derive(Debug, Clone)]
pub struct ReturnMap<'g> {
    pub psi1: StageMap<'g>,
    pub psi2: StageMap<'g>,
}

impl<'g> ReturnMap<'g> {
    pub fn new(geom: &'g RegionGeometry, schedule: StepSchedule, flow: FlowOptions) -> Self {
        Self {
            psi1: StageMap::new(geom, Stage::Psi1, schedule.t1, flow),
            psi2: StageMap::new(geom, Stage::Psi2, schedule.t2, flow),
        }
    }

    pub fn with_flow(&self, flow: FlowOptions) -> Self {
        Self {
            psi1: self.psi1.with_flow(flow),
            psi2: self.psi2.with_flow(flow),
        }
    }

    pub fn apply(&self, z: PhasePoint) -> Option<PhasePoint> {
        let (w, _) = self.psi1.apply(z)?;
        self.psi2.apply(w).map(|(p, _)| p)
    }

    pub fn iterate(&self, z: PhasePoint, n: usize) -> Option<PhasePoint> {
        (0..n).try_fold(z, |p, _| self.apply(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeriodicOptions {
    pub initial_nodes: usize,
    pub spacing_rel: f64,
    pub max_nodes: usize,
    pub max_passes: usize,
    pub end_tol: f64,
    /// Bisection steps on the transversal coordinate.
    pub bisections: usize,
    pub newton_iterations: usize,
    pub flow: FlowOptions,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 33,
            spacing_rel: 1e-2,
            max_nodes: 200_000,
            max_passes: 60,
            end_tol: 1e-12,
            bisections: 44,
            newton_iterations: 20,
            flow: FlowOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub itinerary: Itinerary,
    pub point: PhasePoint,
    /// z, Psi(z), ..., Psi^(L-1)(z) from the verification run.
    pub orbit: Vec<PhasePoint>,
    /// |Psi^L(z) - z| at the polishing tolerance.
    pub residual: f64,
    /// |Psi^L(z) - z| re-integrated at a ten times tighter tolerance.
    pub verified_residual: f64,
    pub verify_rtol: f64,
    /// Observed (step-one label, winding) per iterate in the verification run.
    pub observed: Vec<(Option<usize>, Option<usize>)>,
}

/// Sub-interval of the horizontal path at height v on which Psi^L crosses M
/// from one [-]-arc to the other while following the word.
fn restrict(
    map: &ReturnMap<'_>,
    geom: &RegionGeometry,
    word: &[(usize, usize)],
    v: f64,
    set: &ScanSettings,
) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let base = |s: f64, l: usize| map.iterate(geom.point(RectangleId::M, s, v), l);
    let lost = super::NodeState {
        image: None,
        placement: Placement::Outside(Side::Other),
        label: None,
    };
    for (l, &(j, i)) in word.iter().enumerate() {
        let first = |s: f64| base(s, l).map_or(lost, |z| map.psi1.classify(z));
        let sc = scan(&first, lo, hi, geom, RectangleId::N, set);
        let c = crossings(&sc.nodes).into_iter().find(|c| c.label == j)?;
        (lo, hi) = (c.s_start, c.s_end);
        let second = |s: f64| {
            base(s, l)
                .and_then(|z| map.psi1.apply(z))
                .map_or(lost, |(w, _)| map.psi2.classify(w))
        };
        let sc = scan(&second, lo, hi, geom, RectangleId::M, set);
        let c = crossings(&sc.nodes).into_iter().find(|c| c.label == i)?;
        (lo, hi) = (c.s_start, c.s_end);
    }
    Some((lo, hi))
}

fn residual(map: &ReturnMap<'_>, z: PhasePoint, period: usize) -> Option<[f64; 2]> {
    let w = map.iterate(z, period)?;
    Some([w.x - z.x, w.y - z.y])
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

/// Newton on Psi^L(z) - z with a central-difference Jacobian and backtracking.
fn polish(map: &ReturnMap<'_>, mut z: PhasePoint, period: usize, iterations: usize) -> Option<(PhasePoint, f64)> {
    let mut r = residual(map, z, period)?;
    for _ in 0..iterations {
        if norm(r) < 1e-13 {
            break;
        }
        let h = 1e-7 * z.x.abs().max(z.y.abs()).max(1.0);
        let mut jac = [[0.0; 2]; 2];
        for (col, e) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
            let plus = residual(map, PhasePoint::new(z.x + h * e.0, z.y + h * e.1), period)?;
            let minus = residual(map, PhasePoint::new(z.x - h * e.0, z.y - h * e.1), period)?;
            jac[0][col] = (plus[0] - minus[0]) / (2.0 * h);
            jac[1][col] = (plus[1] - minus[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det;
        let dy = -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        let mut improved = None;
        for _ in 0..12 {
            let cand = PhasePoint::new(z.x + lambda * dx, z.y + lambda * dy);
            if let Some(rc) = residual(map, cand, period) {
                if norm(rc) < norm(r) {
                    improved = Some((cand, rc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((cand, rc)) = improved else { break };
        z = cand;
        r = rc;
    }
    Some((z, norm(r)))
}

/// Locates a periodic point of the return map following the itinerary.
///
/// Along the horizontal path at height v the word selects, leg by leg, a
/// nested sub-interval whose image under Psi^L crosses M; on it
/// u_M(Psi^L) = u is solved by Brent, and v_M(Psi^L) = v by bisection on v.
/// The result is polished by Newton and re-verified, labels included, at a
/// tenfold tighter tolerance.
pub fn find_periodic_orbit(
    cert: &Certification,
    itinerary: &Itinerary,
    opts: &PeriodicOptions,
) -> Result<PeriodicOrbit, HorseshoeError> {
    if !cert.is_granted() {
        return Err(HorseshoeError::Precondition("the horseshoe certificate was not granted".into()));
    }
    if itinerary.symbols.is_empty() || !itinerary.periodic {
        return Err(HorseshoeError::Precondition("need a non-empty periodic itinerary".into()));
    }
    let geom = &cert.geometry;
    let word = itinerary.decode(&geom.step1_labels(), cert.m())?;
    let period = word.len();
    let search = ReturnMap::new(geom, cert.schedule(), opts.flow);
    let set = ScanSettings {
        initial_nodes: opts.initial_nodes,
        spacing: opts.spacing_rel * geom.diameter(),
        max_nodes: opts.max_nodes,
        max_passes: opts.max_passes,
        s_tol: opts.end_tol,
    };
    let solve_u = |v: f64| -> Option<f64> {
        let (lo, hi) = restrict(&search, geom, &word, v, &set)?;
        let g = |s: f64| {
            search
                .iterate(geom.point(RectangleId::M, s, v), period)
                .map_or(f64::NAN, |w| geom.coords(RectangleId::M, w).0 - s)
        };
        roots::brent(g, lo, hi, 1e-15).ok()
    };
    let h = |v: f64| -> Option<(f64, f64)> {
        let u = solve_u(v)?;
        let w = search.iterate(geom.point(RectangleId::M, u, v), period)?;
        Some((u, geom.coords(RectangleId::M, w).1 - v))
    };
    let not_found = |why: String| HorseshoeError::NotFound(why);
    let (mut v_lo, mut v_hi) = (0.0, 1.0);
    let (_, h_lo) = h(v_lo).ok_or_else(|| not_found("no admissible crossing on the lower boundary path".into()))?;
    let (_, h_hi) = h(v_hi).ok_or_else(|| not_found("no admissible crossing on the upper boundary path".into()))?;
    if h_lo.signum() == h_hi.signum() && h_lo != 0.0 && h_hi != 0.0 {
        return Err(not_found(format!("transversal residual keeps its sign: {h_lo}, {h_hi}")));
    }
    let mut best = (0.0, v_lo);
    for _ in 0..opts.bisections {
        let mid = 0.5 * (v_lo + v_hi);
        let (u, hm) = h(mid).ok_or_else(|| not_found(format!("crossing chain lost at v = {mid}")))?;
        best = (u, mid);
        if hm == 0.0 {
            break;
        }
        if hm.signum() == h_lo.signum() {
            v_lo = mid;
        } else {
            v_hi = mid;
        }
    }
    let seed = geom.point(RectangleId::M, best.0, best.1);
    let tight = search.with_flow(opts.flow.tightened(1000.0));
    let (point, res) = polish(&tight, seed, period, opts.newton_iterations)
        .ok_or_else(|| not_found("orbit left the bounded region while polishing".into()))?;

    let verify_flow = opts.flow.tightened(10000.0);
    let check = search.with_flow(verify_flow);
    let mut orbit = Vec::with_capacity(period);
    let mut observed = Vec::with_capacity(period);
    let mut z = point;
    let mut ok = true;
    for &(j, i) in &word {
        orbit.push(z);
        let j_obs = geom.contains(RectangleId::M, z).then(|| geom.step1_label(z)).flatten();
        let Some((w, _)) = check.psi1.apply(z) else {
            return Err(not_found("verification run blew up".into()));
        };
        let in_n = geom.contains(RectangleId::N, w);
        let Some((next, angle)) = check.psi2.apply(w) else {
            return Err(not_found("verification run blew up".into()));
        };
        let i_obs = (in_n && geom.contains(RectangleId::M, next)).then(|| check.psi2.label(w, angle)).flatten();
        ok &= j_obs == Some(j) && i_obs == Some(i);
        observed.push((j_obs, i_obs));
        z = next;
    }
    let verified_residual = z.dist(point);
    if !(ok && verified_residual < 1e-8) {
        return Err(not_found(format!(
            "candidate {point:?} failed verification: residual {verified_residual:e} (polished {res:e}), labels {observed:?}"
        )));
    }
    Ok(PeriodicOrbit {
        itinerary: itinerary.clone(),
        point,
        orbit,
        residual: res,
        verified_residual,
        verify_rtol: verify_flow.rtol,
        observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoding_checks_the_alphabet() {
        let it = Itinerary::periodic(vec![0, 3, 1]);
        assert_eq!(it.decode(&[0, 1], 2).unwrap(), vec![(0, 0), (1, 1), (0, 1)]);
        assert!(matches!(
            Itinerary::periodic(vec![2]).decode(&[1], 2),
            Err(HorseshoeError::Alphabet { symbol: 2, size: 2 })
        ));
        let parsed: Itinerary = serde_json::from_str(r#"{"symbols":[0,1]}"#).unwrap();
        assert!(parsed.periodic);
    }
}
