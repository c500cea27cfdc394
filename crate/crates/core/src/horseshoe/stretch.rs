use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Placement, RectangleId, RegionGeometry, Side};
use crate::flow::{AbsFlow, FlowOptions, FlowStatus, Oscillator, StepReport};
use crate::point::PhasePoint;

/// The two legs of the switched return map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// k1 flow for t1, from M to N.
    Psi1,
    /// k2 flow for t2, from N to M.
    Psi2,
}

/// Sampling and refinement settings of a stretching check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StretchOptions {
    /// Paths u -> (u, v_i) with v_i = i / (paths - 1); the first and last
    /// run along the rectangle's boundary.
    pub paths: usize,
    pub initial_nodes: usize,
    /// Target image spacing as a fraction of the target's diameter.
    pub spacing_rel: f64,
    pub max_nodes: usize,
    pub max_passes: usize,
    /// Parameter resolution at which run ends stop being bisected.
    pub end_tol: f64,
    pub flow: FlowOptions,
}

impl Default for StretchOptions {
    fn default() -> Self {
        Self {
            paths: 16,
            initial_nodes: 65,
            spacing_rel: 1e-3,
            max_nodes: 400_000,
            max_passes: 80,
            end_tol: 1e-12,
            flow: FlowOptions::default(),
        }
    }
}

/// What one node of a path maps to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub image: Option<PhasePoint>,
    pub placement: Placement,
    pub label: Option<usize>,
}

const ANGLE_SUBSTEPS: usize = 8;
/// Sampling interval of the closed-form flow while tracking the angle.
const ANGLE_DT: f64 = 0.01;

/// One leg of the return map with its source and target rectangles.
///
/// For f = |u| the leg is evaluated in closed form and the integrator
/// settings only supply the blow-up bound.
#[derive(Debug, Clone)]
pub struct StageMap<'g> {
    geom: &'g RegionGeometry,
    stage: Stage,
    duration: f64,
    osc: Oscillator,
    exact: Option<AbsFlow>,
    flow: FlowOptions,
}

impl<'g> StageMap<'g> {
    pub fn new(geom: &'g RegionGeometry, stage: Stage, duration: f64, flow: FlowOptions) -> Self {
        let k = match stage {
            Stage::Psi1 => geom.k1(),
            Stage::Psi2 => geom.k2(),
        };
        Self {
            geom,
            stage,
            duration,
            osc: Oscillator::autonomous(geom.nonlinearity().clone(), k),
            exact: geom.nonlinearity().is_abs().then(|| AbsFlow::new(k, flow.blowup_bound)),
            flow,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        self.exact.is_some()
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn geometry(&self) -> &'g RegionGeometry {
        self.geom
    }

    pub fn source(&self) -> RectangleId {
        match self.stage {
            Stage::Psi1 => RectangleId::M,
            Stage::Psi2 => RectangleId::N,
        }
    }

    pub fn target(&self) -> RectangleId {
        self.source().other()
    }

    pub fn with_flow(&self, flow: FlowOptions) -> Self {
        Self::new(self.geom, self.stage, self.duration, flow)
    }

    /// Image of z and, for the second leg, the accumulated clockwise angle
    /// around (b, 0) starting from its value in (-pi, pi].
    pub fn apply(&self, z: PhasePoint) -> Option<(PhasePoint, f64)> {
        match self.stage {
            Stage::Psi1 if self.exact.is_some() => self.exact.unwrap().flow(z, self.duration).ok().map(|w| (w, f64::NAN)),
            Stage::Psi1 => {
                let adv = self.osc.advance(z, 0.0, self.duration, &self.flow);
                (adv.status == FlowStatus::Completed).then_some((adv.point, f64::NAN))
            }
            Stage::Psi2 => self.apply_with_angle(z),
        }
    }

    fn apply_with_angle(&self, z: PhasePoint) -> Option<(PhasePoint, f64)> {
        let c = self.geom.b();
        let mut theta = self.geom.angle(z);
        let mut prev = z.y.atan2(z.x - c);
        let mut turn = |p: [f64; 2]| {
            let a = p[1].atan2(p[0] - c);
            let mut da = a - prev;
            if da > PI {
                da -= 2.0 * PI;
            } else if da <= -PI {
                da += 2.0 * PI;
            }
            theta -= da;
            prev = a;
        };
        if let Some(exact) = self.exact {
            let end = exact.run(z, self.duration, Some(ANGLE_DT), |_, p| turn(p.to_array())).ok()?;
            return Some((end, theta));
        }
        let adv = self.osc.run(z, 0.0, self.duration, &self.flow, |r| {
            if let StepReport::Step(s) = r {
                for i in 1..=ANGLE_SUBSTEPS {
                    turn(s.at_fraction(i as f64 / ANGLE_SUBSTEPS as f64));
                }
            }
        });
        (adv.status == FlowStatus::Completed).then_some((adv.point, theta))
    }

    /// Label of a source point whose image lies in the target: its energy
    /// band for the first leg, its number of completed turns for the second.
    pub fn label(&self, source: PhasePoint, angle: f64) -> Option<usize> {
        match self.stage {
            Stage::Psi1 => self.geom.step1_label(source),
            Stage::Psi2 => {
                let turns = (angle / (2.0 * PI)).floor();
                (turns >= 0.0 && ((angle - 2.0 * PI * turns) <= 0.5 * PI)).then_some(turns as usize)
            }
        }
    }

    pub fn classify(&self, z: PhasePoint) -> NodeState {
        match self.apply(z) {
            None => NodeState {
                image: None,
                placement: Placement::Outside(Side::Other),
                label: None,
            },
            Some((w, angle)) => {
                let placement = self.geom.locate(self.target(), w);
                let label = if placement.is_inside() { self.label(z, angle) } else { None };
                NodeState {
                    image: Some(w),
                    placement,
                    label,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub s: f64,
    pub state: NodeState,
}

pub(crate) struct Scan {
    pub nodes: Vec<Node>,
    pub passes: usize,
    pub complete: bool,
}

pub(crate) struct ScanSettings {
    pub initial_nodes: usize,
    pub spacing: f64,
    pub max_nodes: usize,
    pub max_passes: usize,
    pub s_tol: f64,
}

fn needs_refinement(a: &Node, b: &Node, geom: &RegionGeometry, target: RectangleId, set: &ScanSettings) -> bool {
    if b.s - a.s <= set.s_tol {
        return false;
    }
    let (ia, ib) = (a.state.placement.is_inside(), b.state.placement.is_inside());
    if ia != ib || (ia && a.state.label != b.state.label) {
        return true;
    }
    let diam = geom.diameter();
    match (a.state.image, b.state.image) {
        (Some(p), Some(q)) => {
            let gap = p.dist(q);
            gap > set.spacing
                && geom.distance_to_box(target, p).min(geom.distance_to_box(target, q)) < diam + 2.0 * gap
        }
        (Some(p), None) | (None, Some(p)) => geom.distance_to_box(target, p) < diam,
        (None, None) => false,
    }
}

/// Samples s -> classify(s) on [s0, s1] and bisects until images are
/// resolved near the target and every entry into or exit from it is
/// located to within `s_tol`.
pub(crate) fn scan<F>(classify: &F, s0: f64, s1: f64, geom: &RegionGeometry, target: RectangleId, set: &ScanSettings) -> Scan
where
    F: Fn(f64) -> NodeState + Sync,
{
    let n0 = set.initial_nodes.max(2);
    let mut nodes: Vec<Node> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let s = if i + 1 == n0 { s1 } else { s0 + (s1 - s0) * i as f64 / (n0 - 1) as f64 };
            Node { s, state: classify(s) }
        })
        .collect();
    let mut passes = 0;
    loop {
        let mids: Vec<f64> = nodes
            .windows(2)
            .filter(|w| needs_refinement(&w[0], &w[1], geom, target, set))
            .map(|w| 0.5 * (w[0].s + w[1].s))
            .collect();
        if mids.is_empty() {
            return Scan { nodes, passes, complete: true };
        }
        if passes >= set.max_passes || nodes.len() + mids.len() > set.max_nodes {
            return Scan { nodes, passes, complete: false };
        }
        let fresh: Vec<Node> = mids.par_iter().map(|&s| Node { s, state: classify(s) }).collect();
        let mut merged = Vec::with_capacity(nodes.len() + fresh.len());
        let mut it = fresh.into_iter().peekable();
        for n in nodes {
            while it.peek().is_some_and(|m| m.s < n.s) {
                merged.push(it.next().unwrap());
            }
            merged.push(n);
        }
        merged.extend(it);
        nodes = merged;
        passes += 1;
    }
}

/// A sub-interval of a path whose image crosses the target from one
/// [-]-arc to the other with a single label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingRecord {
    /// First and last parameters of the run of nodes mapped inside.
    pub s_start: f64,
    pub s_end: f64,
    pub entry: Side,
    pub exit: Side,
    pub label: usize,
    /// min over the run of min(v, 1 - v): clearance from the two sides that
    /// are not part of the [-]-set, in normalized coordinates.
    pub clearance: f64,
    pub nodes: usize,
}

pub(crate) fn crossings(nodes: &[Node]) -> Vec<CrossingRecord> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        if !nodes[i].state.placement.is_inside() {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < nodes.len() && nodes[i + 1].state.placement.is_inside() {
            i += 1;
        }
        let end = i;
        i += 1;
        let side_of = |k: Option<usize>| match k.map(|k| nodes[k].state.placement) {
            Some(Placement::Outside(s)) => Some(s),
            _ => None,
        };
        let entry = side_of(start.checked_sub(1));
        let exit = side_of((end + 1 < nodes.len()).then_some(end + 1));
        let (Some(entry), Some(exit)) = (entry, exit) else { continue };
        let opposite = matches!((entry, exit), (Side::Left, Side::Right) | (Side::Right, Side::Left));
        let label = nodes[start].state.label;
        let uniform = nodes[start..=end].iter().all(|n| n.state.label == label);
        let (true, true, Some(label)) = (opposite, uniform, label) else { continue };
        let clearance = nodes[start..=end]
            .iter()
            .map(|n| match n.state.placement {
                Placement::Inside { v, .. } => v.min(1.0 - v),
                Placement::Outside(_) => 0.0,
            })
            .fold(f64::INFINITY, f64::min);
        out.push(CrossingRecord {
            s_start: nodes[start].s,
            s_end: nodes[end].s,
            entry,
            exit,
            label,
            clearance,
            nodes: end - start + 1,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub index: usize,
    /// Fixed transversal coordinate of the path in the source rectangle.
    pub v: f64,
    pub nodes: usize,
    pub passes: usize,
    /// Refinement finished within budget.
    pub complete: bool,
    pub crossings: Vec<CrossingRecord>,
    /// Distinct labels with at least one crossing.
    pub labels: Vec<usize>,
    /// Number of required labels found.
    pub achieved: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StretchVerdict {
    /// Every path carries a crossing for every required label.
    Crossed,
    /// Some fully refined path lacks a required crossing.
    Missing,
    /// Some path ran out of refinement budget before showing every crossing.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchCertificate {
    pub stage: Stage,
    pub source: RectangleId,
    pub target: RectangleId,
    pub duration: f64,
    pub required_labels: Vec<usize>,
    /// min over paths of the number of required labels crossed.
    pub crossing_number: usize,
    pub min_clearance: f64,
    pub path_count: usize,
    pub refinement_depth: usize,
    pub verdict: StretchVerdict,
    /// First path that failed or stayed unresolved.
    pub witness: Option<usize>,
    pub paths: Vec<PathRecord>,
}

impl StretchCertificate {
    pub fn crossed(&self) -> bool {
        self.verdict == StretchVerdict::Crossed
    }
}

/// Checks on sampled paths that the leg stretches its source across its
/// target once per required label.
pub fn verify_stretch(map: &StageMap<'_>, required: &[usize], opts: &StretchOptions) -> StretchCertificate {
    let geom = map.geometry();
    let source = map.source();
    let settings = ScanSettings {
        initial_nodes: opts.initial_nodes,
        spacing: opts.spacing_rel * geom.diameter(),
        max_nodes: opts.max_nodes,
        max_passes: opts.max_passes,
        s_tol: opts.end_tol,
    };
    let count = opts.paths.max(2);
    let paths: Vec<PathRecord> = (0..count)
        .into_par_iter()
        .map(|index| {
            let v = index as f64 / (count - 1) as f64;
            let classify = |s: f64| map.classify(geom.point(source, s, v));
            let sc = scan(&classify, 0.0, 1.0, geom, map.target(), &settings);
            let found = crossings(&sc.nodes);
            let mut labels: Vec<usize> = found.iter().map(|c| c.label).collect();
            labels.sort_unstable();
            labels.dedup();
            let achieved = required.iter().filter(|l| labels.contains(l)).count();
            PathRecord {
                index,
                v,
                nodes: sc.nodes.len(),
                passes: sc.passes,
                complete: sc.complete,
                crossings: found,
                labels,
                achieved,
            }
        })
        .collect();
    let full = |p: &PathRecord| p.achieved == required.len();
    let missing = paths.iter().find(|p| !full(p) && p.complete).map(|p| p.index);
    let unresolved = paths.iter().find(|p| !full(p) && !p.complete).map(|p| p.index);
    let (verdict, witness) = match (missing, unresolved) {
        (Some(i), _) => (StretchVerdict::Missing, Some(i)),
        (None, Some(i)) => (StretchVerdict::Inconclusive, Some(i)),
        (None, None) => (StretchVerdict::Crossed, None),
    };
    let min_clearance = paths
        .iter()
        .flat_map(|p| p.crossings.iter().filter(|c| required.contains(&c.label)).map(|c| c.clearance))
        .fold(f64::INFINITY, f64::min);
    StretchCertificate {
        stage: map.stage(),
        source,
        target: map.target(),
        duration: map.duration(),
        required_labels: required.to_vec(),
        crossing_number: paths.iter().map(|p| p.achieved).min().unwrap_or(0),
        min_clearance,
        path_count: count,
        refinement_depth: paths.iter().map(|p| p.passes).max().unwrap_or(0),
        verdict,
        witness,
        paths,
    }
}
