use serde::{Deserialize, Serialize};

use super::{FlowError, Forcing};
use crate::model::Nonlinearity;
use crate::ode::{self, DenseStep, State};
use crate::point::PhasePoint;
use crate::roots;

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Integration stops once |x| + |y| exceeds this bound.
    pub blowup_bound: f64,
    /// Largest step; `null` in JSON stands for no limit.
    #[serde(with = "unbounded")]
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            blowup_bound: 1e6,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl FlowOptions {
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    Completed,
    BlowUp,
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// A discontinuity of the step forcing.
    Switch,
    /// x crossed a breakpoint of f.
    Breakpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub point: PhasePoint,
}

/// End state of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advance {
    pub t: f64,
    pub point: PhasePoint,
    pub status: FlowStatus,
    pub steps: usize,
}

impl Advance {
    pub fn into_result(self) -> Result<PhasePoint, FlowError> {
        match self.status {
            FlowStatus::Completed => Ok(self.point),
            FlowStatus::BlowUp => Err(FlowError::BlowUp { t: self.t, point: self.point }),
            FlowStatus::StepUnderflow => Err(FlowError::StepUnderflow { t: self.t }),
            FlowStatus::MaxSteps => Err(FlowError::MaxSteps { t: self.t }),
        }
    }
}

/// A recorded solution with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub steps: Vec<DenseStep>,
    pub events: Vec<Event>,
    pub status: FlowStatus,
}

impl Trajectory {
    pub fn last(&self) -> PhasePoint {
        *self.points.last().expect("trajectory holds the initial point")
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Dense-output evaluation at t within the covered span.
    pub fn eval(&self, t: f64) -> Option<PhasePoint> {
        let (lo, hi) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        if t < lo || t > hi || self.steps.is_empty() {
            return if t == self.t_start() { Some(self.points[0]) } else { None };
        }
        let forward = self.t_end() >= self.t_start();
        let idx = self.steps.partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        let s = &self.steps[idx.min(self.steps.len() - 1)];
        Some(PhasePoint::from_array(s.at(t)))
    }
}

/// u'' + c u' + f(u) = p(t) as the first-order system x' = y, y' = -c y - f(x) + p(t).
#[derive(Debug, Clone)]
pub struct Oscillator {
    pub f: Nonlinearity,
    pub forcing: Forcing,
    pub damping: f64,
}

/// What the stepper reports to its observer.
pub enum StepReport<'a> {
    Step(&'a DenseStep),
    Event(Event),
}

impl Oscillator {
    pub fn new(f: Nonlinearity, forcing: Forcing, damping: f64) -> Result<Self, FlowError> {
        forcing.validate()?;
        if !(damping >= 0.0) {
            return Err(FlowError::InvalidForcing(format!("damping c = {damping} must be non-negative")));
        }
        Ok(Self { f, forcing, damping })
    }

    /// The frozen system with constant forcing k and no damping.
    pub fn autonomous(f: Nonlinearity, k: f64) -> Self {
        Self {
            f,
            forcing: Forcing::Constant { k },
            damping: 0.0,
        }
    }

    fn branch_for(&self, x: f64, vx: f64) -> usize {
        let b = self.f.branch_of(x);
        if vx < 0.0 && self.f.breakpoints().iter().any(|&p| p == x) {
            b - 1
        } else {
            b
        }
    }

    fn region_bounds(&self, branch: usize) -> (f64, f64) {
        let bps = self.f.breakpoints();
        let lo = if branch == 0 { f64::NEG_INFINITY } else { bps[branch - 1] };
        let hi = bps.get(branch).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Integrates from (t0, z0) to t1, reporting every accepted step and event.
    pub fn run<O: FnMut(StepReport<'_>)>(
        &self,
        z0: PhasePoint,
        t0: f64,
        t1: f64,
        opts: &FlowOptions,
        mut observer: O,
    ) -> Advance {
        let forward = t1 >= t0;
        let dir = if forward { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y: State = z0.to_array();
        let mut steps = 0usize;
        let c = self.damping;
        let span = (t1 - t0).abs();
        let mut h = span.min(opts.h_max).min(1e-2);
        let done = |status, t, y: State, steps| Advance {
            t,
            point: PhasePoint::from_array(y),
            status,
            steps,
        };
        if span == 0.0 {
            return done(FlowStatus::Completed, t, y, 0);
        }
        let mut branch = self.branch_for(y[0], y[1] * dir);
        let mut k1: Option<State> = None;
        while t != t1 {
            if steps >= opts.max_steps {
                return done(FlowStatus::MaxSteps, t, y, steps);
            }
            let seg_end = match self.forcing.next_switch(t, forward) {
                Some(s) if (forward && s < t1) || (!forward && s > t1) => s,
                _ => t1,
            };
            // Piecewise-constant forcing is frozen on the segment so that stage
            // evaluations at its end never see the next level.
            let frozen = if self.forcing.is_piecewise_constant() {
                Some(self.forcing.value(0.5 * (t + seg_end)))
            } else {
                None
            };
            let f = &self.f;
            let forcing = &self.forcing;
            let b = branch;
            let rhs = move |s: f64, z: &State| -> State {
                let p = frozen.unwrap_or_else(|| forcing.value(s));
                [z[1], -c * z[1] - f.eval_on_branch(z[0], b) + p]
            };
            let k_start = *k1.get_or_insert_with(|| rhs(t, &y));
            let remaining = (seg_end - t).abs();
            let mut hs = h.min(remaining);
            let lands = hs >= remaining * (1.0 - 1e-12);
            if lands {
                hs = remaining;
            }
            let h_min = 1e-14 * t.abs().max(1.0);
            let att = ode::attempt(&rhs, t, &y, &k_start, dir * hs, opts.rtol, opts.atol);
            steps += 1;
            if !(att.err <= 1.0) {
                let fac = if att.err.is_finite() { ode::step_factor(att.err) } else { 0.2 };
                h = hs * fac.min(0.9);
                if h < h_min {
                    return done(FlowStatus::StepUnderflow, t, y, steps);
                }
                continue;
            }
            let (lo, hi) = self.region_bounds(branch);
            let x_new = att.y1[0];
            if x_new < lo || x_new >= hi {
                let bp = if x_new < lo { lo } else { hi };
                let dense = att.dense;
                let g = |th: f64| dense.at_fraction(th)[0] - bp;
                let g0 = g(0.0);
                let crossing = if g0 != 0.0 && g0.signum() != g(1.0).signum() {
                    roots::brent(g, 0.0, 1.0, 1e-15).ok()
                } else {
                    None
                };
                if let Some(th) = crossing.filter(|th| th * hs > h_min) {
                    let hc = th * hs;
                    let sub = ode::attempt(&rhs, t, &y, &k_start, dir * hc, opts.rtol, opts.atol);
                    observer(StepReport::Step(&sub.dense));
                    t += dir * hc;
                    y = sub.y1;
                    observer(StepReport::Event(Event {
                        t,
                        kind: EventKind::Breakpoint,
                        point: PhasePoint::from_array(y),
                    }));
                    let moving_left = y[1] * dir < 0.0;
                    branch = if moving_left {
                        self.f.branch_of(bp) - 1
                    } else {
                        self.f.branch_of(bp)
                    };
                    k1 = None;
                    if self.blown_up(&y, opts) {
                        return done(FlowStatus::BlowUp, t, y, steps);
                    }
                    continue;
                }
                // Grazing contact or a crossing right at the step start.
                branch = self.branch_for(x_new, att.y1[1] * dir);
                observer(StepReport::Step(&att.dense));
                t = if lands { seg_end } else { t + dir * hs };
                y = att.y1;
                k1 = None;
            } else {
                observer(StepReport::Step(&att.dense));
                t = if lands { seg_end } else { t + dir * hs };
                y = att.y1;
                k1 = Some(att.k7);
            }
            if lands && t != t1 {
                observer(StepReport::Event(Event {
                    t,
                    kind: EventKind::Switch,
                    point: PhasePoint::from_array(y),
                }));
                k1 = None;
            }
            if self.blown_up(&y, opts) {
                return done(FlowStatus::BlowUp, t, y, steps);
            }
            h = (hs * ode::step_factor(att.err)).min(opts.h_max);
        }
        done(FlowStatus::Completed, t, y, steps)
    }

    fn blown_up(&self, y: &State, opts: &FlowOptions) -> bool {
        !(y[0].abs() + y[1].abs() <= opts.blowup_bound)
    }

    /// Final state at t1 without recording.
    pub fn advance(&self, z0: PhasePoint, t0: f64, t1: f64, opts: &FlowOptions) -> Advance {
        self.run(z0, t0, t1, opts, |_| {})
    }

    /// Flow map z0 -> z(t1), failing on blow-up.
    pub fn flow(&self, z0: PhasePoint, t0: f64, t1: f64, opts: &FlowOptions) -> Result<PhasePoint, FlowError> {
        self.advance(z0, t0, t1, opts).into_result()
    }

    /// Integrates and records samples, dense output and events.
    pub fn integrate(&self, z0: PhasePoint, t0: f64, t1: f64, opts: &FlowOptions) -> Trajectory {
        let mut times = vec![t0];
        let mut points = vec![z0];
        let mut steps = Vec::new();
        let mut events = Vec::new();
        let adv = self.run(z0, t0, t1, opts, |r| match r {
            StepReport::Step(s) => {
                steps.push(*s);
                times.push(s.t1());
                points.push(PhasePoint::from_array(s.end()));
            }
            StepReport::Event(e) => {
                // Events sit on step ends; use their exact time stamps.
                *times.last_mut().unwrap() = e.t;
                *points.last_mut().unwrap() = e.point;
                events.push(e);
            }
        });
        // Snap the last sample to the exact end time reached.
        if let Some(t) = times.last_mut() {
            *t = adv.t;
        }
        if let Some(p) = points.last_mut() {
            *p = adv.point;
        }
        Trajectory {
            times,
            points,
            steps,
            events,
            status: adv.status,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EnergyFrame;
    use std::f64::consts::PI;

    #[test]
    fn abs_isochronous_return() {
        let osc = Oscillator::autonomous(Nonlinearity::abs(), 2.0);
        let z0 = PhasePoint::new(2.0 + 2f64.sqrt(), 0.0);
        let z = osc.flow(z0, 0.0, 2.0 * PI, &FlowOptions::default()).unwrap();
        assert!(z.dist(z0) < 1e-8, "{z:?}");
    }

    #[test]
    fn breakpoint_crossings_are_located() {
        let osc = Oscillator::autonomous(Nonlinearity::abs(), 2.0);
        // Energy 1 > 0: the closed orbit crosses x = 0.
        let fr = EnergyFrame::new(Nonlinearity::abs(), 2.0).unwrap();
        let z0 = PhasePoint::new(fr.root_middle(1.0).unwrap(), 0.0);
        let tr = osc.integrate(z0, 0.0, 30.0, &FlowOptions::default());
        let crossings: Vec<_> = tr.events.iter().filter(|e| e.kind == EventKind::Breakpoint).collect();
        assert!(crossings.len() >= 2);
        for e in crossings {
            assert!(e.point.x.abs() < 1e-9, "{e:?}");
        }
        let drift = tr.points.iter().map(|p| (fr.energy(*p) - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
    }

    #[test]
    fn step_forcing_samples_switch_instant() {
        let forcing = Forcing::Step { k1: 0.0, k2: 2.0, t1: 2.0, t2: 13.0 };
        let osc = Oscillator::new(Nonlinearity::abs(), forcing, 0.0).unwrap();
        let tr = osc.integrate(PhasePoint::new(-1.0, 2.0), 0.0, 15.0, &FlowOptions::default());
        assert!(tr.times.contains(&2.0));
        assert_eq!(tr.events.iter().filter(|e| e.kind == EventKind::Switch).count(), 1);
        assert_eq!(*tr.times.last().unwrap(), 15.0);
    }

    #[test]
    fn semigroup_for_step_forcing() {
        let f = Nonlinearity::abs();
        let forcing = Forcing::Step { k1: 0.0, k2: 2.0, t1: 2.0, t2: 3.0 };
        let osc = Oscillator::new(f.clone(), forcing, 0.0).unwrap();
        let opts = FlowOptions::default();
        let z0 = PhasePoint::new(-0.5, 1.5);
        let whole = osc.flow(z0, 0.0, 5.0, &opts).unwrap();
        let a = Oscillator::autonomous(f.clone(), 0.0).flow(z0, 0.0, 2.0, &opts).unwrap();
        let b = Oscillator::autonomous(f, 2.0).flow(a, 0.0, 3.0, &opts).unwrap();
        assert!(whole.dist(b) < 1e-9);
    }

    #[test]
    fn backward_integration_reverses() {
        for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
            let osc = Oscillator::autonomous(f, 2.0);
            let opts = FlowOptions::default();
            let z0 = PhasePoint::new(1.0, 0.7);
            let z1 = osc.flow(z0, 0.0, 20.0, &opts).unwrap();
            let back = osc.flow(z1, 20.0, 0.0, &opts).unwrap();
            assert!(back.dist(z0) < 1e-8, "{back:?}");
        }
    }

    #[test]
    fn blowup_is_flagged() {
        // Below the minimum of f every solution escapes.
        let osc = Oscillator::autonomous(Nonlinearity::sqrt1p(), -1.0);
        let adv = osc.advance(PhasePoint::new(0.0, 0.0), 0.0, 1e4, &FlowOptions { blowup_bound: 1e3, ..Default::default() });
        assert_eq!(adv.status, FlowStatus::BlowUp);
    }

    #[test]
    fn dense_eval_matches_samples() {
        let osc = Oscillator::autonomous(Nonlinearity::sqrt1p(), 2.0);
        let tr = osc.integrate(PhasePoint::new(0.0, 1.0), 0.0, 10.0, &FlowOptions::default());
        for (t, p) in tr.times.iter().zip(&tr.points) {
            assert!(tr.eval(*t).unwrap().dist(*p) < 1e-12);
        }
        assert!(tr.eval(11.0).is_none());
    }
}
