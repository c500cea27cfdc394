use serde::{Deserialize, Serialize};

use super::HorseshoeError;
use crate::model::{EnergyFrame, FrameSummary, Nonlinearity};
use crate::point::PhasePoint;

/// The three energy levels that cut out the strip and the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl Levels {
    /// Levels of the switched |u| example: E_0 in [0, 8] and
    /// E_2 in [(4 eps - eps^2) / 2, 2], the annulus reaching the orbit through (-eps, 0).
    pub fn abs_example(eps: f64) -> Self {
        Self {
            a: 0.0,
            b: 8.0,
            d: 0.5 * (4.0 * eps - eps * eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RectangleId {
    /// Upper half: strip meets annulus with y > 0.
    M,
    /// Lower half: strip meets annulus with y < 0.
    N,
}

impl RectangleId {
    pub fn other(self) -> Self {
        match self {
            Self::M => Self::N,
            Self::N => Self::M,
        }
    }
}

/// Side of a rectangle an outside point lies beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// Beyond the u = 0 arc of the [-]-set.
    Left,
    /// Beyond the u = 1 arc of the [-]-set.
    Right,
    Other,
}

/// Position of a point relative to an oriented rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Placement {
    Inside { u: f64, v: f64 },
    Outside(Side),
}

impl Placement {
    pub fn is_inside(&self) -> bool {
        matches!(self, Self::Inside { .. })
    }
}

/// Strip S = {A <= E_k1 <= B} minus the loop interior, annulus
/// {D <= E_k2 <= Phi_k2(x_u(k2)), x >= x_u(k2)}, and the rectangles
/// M, N where they meet in the upper and lower half-planes.
///
/// Rectangle coordinates are normalized energies. On M, u runs from the
/// level A to B of E_k1 and v from D to the saddle level of E_k2; on N the
/// roles are swapped so that u always joins the two [-]-arcs.
#[derive(Debug, Clone)]
pub struct RegionGeometry {
    frame1: EnergyFrame,
    frame2: EnergyFrame,
    levels: Levels,
    a: f64,
    d: f64,
    x_plus_d: f64,
    b: f64,
    phi1_u: f64,
    phi2_u: f64,
    delta_e: f64,
    diameter: f64,
    bbox: [f64; 4],
}

/// Serializable view of a geometry.
#[derive(Debug, Clone, Serialize)]
pub struct GeometrySummary {
    pub frame_k1: FrameSummary,
    pub frame_k2: FrameSummary,
    pub levels: Levels,
    pub a: f64,
    pub d: f64,
    pub x_plus_d: f64,
    pub b: f64,
    pub delta_e: f64,
    pub step1_labels: Vec<usize>,
    pub rectangle_diameter: f64,
}

fn violated(inequality: &'static str, detail: String) -> HorseshoeError {
    HorseshoeError::Constraint { inequality, detail }
}

fn ensure(holds: bool, inequality: &'static str, detail: impl FnOnce() -> String) -> Result<(), HorseshoeError> {
    if holds {
        Ok(())
    } else {
        Err(violated(inequality, detail()))
    }
}

impl RegionGeometry {
    /// Builds and checks the regions; every failed constraint is reported by name.
    pub fn build(f: &Nonlinearity, k1: f64, k2: f64, levels: Levels) -> Result<Self, HorseshoeError> {
        ensure(k1 < k2, "k1 < k2", || format!("k1 = {k1}, k2 = {k2}"))?;
        let frame1 = EnergyFrame::new(f.clone(), k1)?;
        let frame2 = EnergyFrame::new(f.clone(), k2)?;
        let Levels { a: la, b: lb, d: ld } = levels;
        let phi1_u = frame1.phi_at_xu();
        let phi2_u = frame2.phi_at_xu();
        let (xu1, xu2) = (frame1.x_u(), frame2.x_u());
        let degenerate = k1 == 0.0;

        if degenerate {
            ensure(la <= phi1_u, "A <= Phi_k1(x_u(k1))", || format!("A = {la}, Phi_k1(x_u(k1)) = {phi1_u}"))?;
        } else {
            ensure(la < phi1_u, "A < Phi_k1(x_u(k1))", || format!("A = {la}, Phi_k1(x_u(k1)) = {phi1_u}"))?;
        }
        let a = frame1.root_left(la)?;
        let a_ok = xu2 < a && (a < xu1 || (degenerate && a <= xu1));
        ensure(a_ok, "x_u(k2) < a < x_u(k1)", || format!("x_u(k2) = {xu2}, a = {a}, x_u(k1) = {xu1}"))?;

        let phi2_s = frame2.phi_at_xs();
        ensure(phi2_s < ld && ld < phi2_u, "Phi_k2(x_s(k2)) < D < Phi_k2(x_u(k2))", || {
            format!("Phi_k2(x_s) = {phi2_s}, D = {ld}, Phi_k2(x_u) = {phi2_u}")
        })?;
        let d = frame2.root_middle(ld)?;
        ensure(xu2 < d && d < a, "x_u(k2) < d < a", || format!("x_u(k2) = {xu2}, d = {d}, a = {a}"))?;
        let x_plus_d = frame2.root_right(ld)?;
        let xh2 = frame2.x_h().expect("k2 > 0 has a homoclinic loop");
        ensure(frame2.x_s() < x_plus_d && x_plus_d < xh2, "x_s(k2) < x_+(D) < x_h(k2)", || {
            format!("x_s(k2) = {}, x_+(D) = {x_plus_d}, x_h(k2) = {xh2}", frame2.x_s())
        })?;

        ensure(lb > phi1_u, "B > Phi_k1(x_u(k1))", || format!("B = {lb}, Phi_k1(x_u(k1)) = {phi1_u}"))?;
        let b = frame1.root_right(lb)?;
        let xh1 = frame1.x_h().unwrap_or(0.0);
        ensure(xh1 < b && b < x_plus_d, "x_h(k1) < b < x_+(D)", || {
            format!("x_h(k1) = {xh1}, b = {b}, x_+(D) = {x_plus_d}")
        })?;

        let mut geom = Self {
            frame1,
            frame2,
            levels,
            a,
            d,
            x_plus_d,
            b,
            phi1_u,
            phi2_u,
            delta_e: 1e-9 * (lb - la),
            diameter: 0.0,
            bbox: [0.0; 4],
        };
        geom.check_energy_box()?;
        let edge = geom.boundary(RectangleId::M, 64);
        let mut diam: f64 = 0.0;
        for (i, p) in edge.iter().enumerate() {
            for q in &edge[i + 1..] {
                diam = diam.max(p.dist(*q));
            }
        }
        let xs = edge.iter().map(|p| p.x);
        let ys = edge.iter().map(|p| p.y);
        geom.bbox = [
            xs.clone().fold(f64::INFINITY, f64::min),
            xs.fold(f64::NEG_INFINITY, f64::max),
            ys.clone().fold(f64::INFINITY, f64::min),
            ys.fold(f64::NEG_INFINITY, f64::max),
        ];
        geom.diameter = diam;
        Ok(geom)
    }

    /// Every (E_k1, E_k2) pair of the box must be realized by exactly one
    /// point per half-plane on the right components.
    fn check_energy_box(&self) -> Result<(), HorseshoeError> {
        const N: usize = 33;
        for i in 0..N {
            for j in 0..N {
                let (u, v) = (i as f64 / (N - 1) as f64, j as f64 / (N - 1) as f64);
                let (e1, e2) = self.energies_at(RectangleId::M, u, v);
                let x = self.abscissa(e1, e2);
                let y2 = 2.0 * (e1 - self.frame1.phi(x));
                ensure(y2 > 0.0, "y != 0 on the rectangle energy box", || {
                    format!("E_k1 = {e1}, E_k2 = {e2} gives x = {x}, y^2 = {y2}")
                })?;
                ensure(x >= self.frame2.x_u(), "x >= x_u(k2) on the rectangle energy box", || {
                    format!("E_k1 = {e1}, E_k2 = {e2} gives x = {x} < x_u(k2) = {}", self.frame2.x_u())
                })?;
                if e1 < self.phi1_u {
                    ensure(x <= self.frame1.x_u(), "x <= x_u(k1) on the lower strip band", || {
                        format!("E_k1 = {e1}, E_k2 = {e2} gives x = {x} > x_u(k1) = {}", self.frame1.x_u())
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Automatic levels at fixed fractions of the admissible ranges, halved
    /// until the geometry checks pass.
    pub fn auto_levels(f: &Nonlinearity, k1: f64, k2: f64) -> Result<Levels, HorseshoeError> {
        ensure(k1 < k2, "k1 < k2", || format!("k1 = {k1}, k2 = {k2}"))?;
        let frame1 = EnergyFrame::new(f.clone(), k1)?;
        let frame2 = EnergyFrame::new(f.clone(), k2)?;
        let phi1_u = frame1.phi_at_xu();
        let (phi2_s, phi2_u) = (frame2.phi_at_xs(), frame2.phi_at_xu());
        let mut last = None;
        for frac in [0.25, 0.125, 0.0625, 0.03125] {
            let la = phi1_u - frac * (phi1_u - frame1.phi(frame2.x_u()));
            let a = frame1.root_left(la)?;
            let mut ld = 0.5 * (phi2_s + phi2_u);
            if frame2.root_middle(ld)? >= a {
                ld = 0.5 * (frame2.phi(a) + phi2_u);
            }
            let xp = frame2.root_right(ld)?;
            let lb = phi1_u + frac * (frame1.phi(xp) - phi1_u);
            let levels = Levels { a: la, b: lb, d: ld };
            match Self::build(f, k1, k2, levels) {
                Ok(_) => return Ok(levels),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn frame_k1(&self) -> &EnergyFrame {
        &self.frame1
    }

    pub fn frame_k2(&self) -> &EnergyFrame {
        &self.frame2
    }

    pub fn k1(&self) -> f64 {
        self.frame1.k()
    }

    pub fn k2(&self) -> f64 {
        self.frame2.k()
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        self.frame1.nonlinearity()
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    /// a = x_*(A).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// d = x_-(D).
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn x_plus_d(&self) -> f64 {
        self.x_plus_d
    }

    /// b = x^*(B), also the center of the angle around which annulus points turn.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Energy margin that keeps the step-one sets off the k1 saddle level.
    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// [x_min, x_max, y_min, y_max] of M; N is its mirror image.
    pub fn bbox(&self, rect: RectangleId) -> [f64; 4] {
        let [x0, x1, y0, y1] = self.bbox;
        match rect {
            RectangleId::M => [x0, x1, y0, y1],
            RectangleId::N => [x0, x1, -y1, -y0],
        }
    }

    /// Euclidean distance from z to the bounding box of a rectangle.
    pub fn distance_to_box(&self, rect: RectangleId, z: PhasePoint) -> f64 {
        let [x0, x1, y0, y1] = self.bbox(rect);
        let dx = (x0 - z.x).max(z.x - x1).max(0.0);
        let dy = (y0 - z.y).max(z.y - y1).max(0.0);
        dx.hypot(dy)
    }

    /// (E_k1, E_k2) at z, with E_k2 = E_k1 - (k2 - k1) x.
    pub fn energies(&self, z: PhasePoint) -> (f64, f64) {
        let e1 = self.frame1.energy(z);
        (e1, e1 - (self.k2() - self.k1()) * z.x)
    }

    fn abscissa(&self, e1: f64, e2: f64) -> f64 {
        (e1 - e2) / (self.k2() - self.k1())
    }

    fn energies_at(&self, rect: RectangleId, u: f64, v: f64) -> (f64, f64) {
        let Levels { a, b, d } = self.levels;
        let e1_of = |s: f64| a + s * (b - a);
        let e2_of = |s: f64| d + s * (self.phi2_u - d);
        match rect {
            RectangleId::M => (e1_of(u), e2_of(v)),
            RectangleId::N => (e1_of(v), e2_of(u)),
        }
    }

    /// Normalized coordinates (u, v), defined on the whole plane.
    pub fn coords(&self, rect: RectangleId, z: PhasePoint) -> (f64, f64) {
        let Levels { a, b, d } = self.levels;
        let (e1, e2) = self.energies(z);
        let s1 = (e1 - a) / (b - a);
        let s2 = (e2 - d) / (self.phi2_u - d);
        match rect {
            RectangleId::M => (s1, s2),
            RectangleId::N => (s2, s1),
        }
    }

    /// The point with coordinates (u, v) in [0, 1]^2.
    pub fn point(&self, rect: RectangleId, u: f64, v: f64) -> PhasePoint {
        let (e1, e2) = self.energies_at(rect, u, v);
        let x = self.abscissa(e1, e2);
        let y = (2.0 * (e1 - self.frame1.phi(x))).max(0.0).sqrt();
        match rect {
            RectangleId::M => PhasePoint::new(x, y),
            RectangleId::N => PhasePoint::new(x, -y),
        }
    }

    fn on_components(&self, z: PhasePoint, e1: f64) -> bool {
        z.x >= self.frame2.x_u() && (e1 >= self.phi1_u || z.x <= self.frame1.x_u())
    }

    pub fn locate(&self, rect: RectangleId, z: PhasePoint) -> Placement {
        let (u, v) = self.coords(rect, z);
        let sign_ok = match rect {
            RectangleId::M => z.y > 0.0,
            RectangleId::N => z.y < 0.0,
        };
        let e1 = self.frame1.energy(z);
        let strip_ok = e1 >= self.phi1_u || z.x <= self.frame1.x_u();
        if !(sign_ok && strip_ok && (0.0..=1.0).contains(&v)) {
            return Placement::Outside(Side::Other);
        }
        // Beyond the u-sides the level sets are left whatever the component.
        if u < 0.0 {
            Placement::Outside(Side::Left)
        } else if u > 1.0 {
            Placement::Outside(Side::Right)
        } else if u.is_nan() || !self.on_components(z, e1) {
            Placement::Outside(Side::Other)
        } else {
            Placement::Inside { u, v }
        }
    }

    pub fn contains(&self, rect: RectangleId, z: PhasePoint) -> bool {
        self.locate(rect, z).is_inside()
    }

    /// Membership in the strip S, invariant under the k1 flow.
    pub fn in_strip(&self, z: PhasePoint) -> bool {
        let e1 = self.frame1.energy(z);
        let Levels { a, b, .. } = self.levels;
        a <= e1 && e1 <= b && (e1 >= self.phi1_u || z.x <= self.frame1.x_u())
    }

    /// Membership in the annulus, invariant under the k2 flow.
    pub fn in_annulus(&self, z: PhasePoint) -> bool {
        let e2 = self.frame2.energy(z);
        self.levels.d <= e2 && e2 <= self.phi2_u && z.x >= self.frame2.x_u()
    }

    /// Step-one label of a point of M: 0 below the k1 saddle level, 1 above,
    /// `None` inside the excluded energy margin.
    pub fn step1_label(&self, z: PhasePoint) -> Option<usize> {
        let e1 = self.frame1.energy(z);
        if e1 <= self.phi1_u - self.delta_e {
            Some(0)
        } else if e1 >= self.phi1_u + self.delta_e {
            Some(1)
        } else {
            None
        }
    }

    /// Step-one labels whose sets are non-empty.
    pub fn step1_labels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if self.levels.a < self.phi1_u - self.delta_e {
            out.push(0);
        }
        out.push(1);
        out
    }

    /// Clockwise angle around (b, 0), zero on the half-line to the left of
    /// it, in (-pi, pi].
    pub fn angle(&self, z: PhasePoint) -> f64 {
        let th = std::f64::consts::PI - z.y.atan2(z.x - self.b);
        if th > std::f64::consts::PI {
            th - 2.0 * std::f64::consts::PI
        } else {
            th
        }
    }

    /// Boundary samples of a rectangle, counter-clockwise in (u, v).
    pub fn boundary(&self, rect: RectangleId, per_edge: usize) -> Vec<PhasePoint> {
        let n = per_edge.max(2);
        let mut out = Vec::with_capacity(4 * n);
        let t = |i: usize| i as f64 / n as f64;
        for i in 0..n {
            out.push(self.point(rect, t(i), 0.0));
        }
        for i in 0..n {
            out.push(self.point(rect, 1.0, t(i)));
        }
        for i in 0..n {
            out.push(self.point(rect, 1.0 - t(i), 1.0));
        }
        for i in 0..n {
            out.push(self.point(rect, 0.0, 1.0 - t(i)));
        }
        out
    }

    pub fn summary(&self) -> GeometrySummary {
        GeometrySummary {
            frame_k1: self.frame1.summary(),
            frame_k2: self.frame2.summary(),
            levels: self.levels,
            a: self.a,
            d: self.d,
            x_plus_d: self.x_plus_d,
            b: self.b,
            delta_e: self.delta_e,
            step1_labels: self.step1_labels(),
            rectangle_diameter: self.diameter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowOptions, Oscillator};
    use rand::{Rng, SeedableRng};

    fn abs_geometry() -> RegionGeometry {
        RegionGeometry::build(&Nonlinearity::abs(), 0.0, 2.0, Levels::abs_example(0.1)).unwrap()
    }

    #[test]
    fn abs_example_abscissas() {
        let g = abs_geometry();
        assert_eq!(g.a(), 0.0);
        assert!((g.d() + 0.1).abs() < 1e-12);
        assert!((g.b() - 4.0).abs() < 1e-12);
        // x^2 / 2 - 2 x = 0.195 on the right of the center.
        let xp = 2.0 + (4.0f64 + 0.39).sqrt();
        assert!((g.x_plus_d() - xp).abs() < 1e-12);
        assert_eq!(g.step1_labels(), vec![1]);
    }

    #[test]
    fn annulus_through_plus_eps_is_rejected() {
        // E_2(eps, 0) puts the inner orbit's left root at eps > a = 0.
        let ld = 0.5 * 0.1 * 0.1 - 2.0 * 0.1;
        let err = RegionGeometry::build(&Nonlinearity::abs(), 0.0, 2.0, Levels { a: 0.0, b: 8.0, d: ld }).unwrap_err();
        match err {
            HorseshoeError::Constraint { inequality, .. } => assert_eq!(inequality, "x_u(k2) < d < a"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn equal_levels_are_rejected() {
        let err = RegionGeometry::build(&Nonlinearity::abs(), 2.0, 2.0, Levels::abs_example(0.1)).unwrap_err();
        assert!(matches!(err, HorseshoeError::Constraint { inequality: "k1 < k2", .. }));
    }

    #[test]
    fn auto_levels_for_smooth_pair() {
        let f = Nonlinearity::sqrt1p();
        let levels = RegionGeometry::auto_levels(&f, 2.0, 4.0).unwrap();
        let g = RegionGeometry::build(&f, 2.0, 4.0, levels).unwrap();
        assert_eq!(g.step1_labels(), vec![0, 1]);
        assert!(g.diameter() > 0.0);
    }

    #[test]
    fn coordinates_round_trip() {
        let g = RegionGeometry::build(&Nonlinearity::sqrt1p(), 2.0, 4.0, RegionGeometry::auto_levels(&Nonlinearity::sqrt1p(), 2.0, 4.0).unwrap()).unwrap();
        for rect in [RectangleId::M, RectangleId::N] {
            for &(u, v) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.05)] {
                let z = g.point(rect, u, v);
                let (uu, vv) = g.coords(rect, z);
                assert!((uu - u).abs() < 1e-10 && (vv - v).abs() < 1e-10, "{rect:?} {u} {v} -> {uu} {vv}");
                assert!(g.contains(rect, z));
                assert!(!g.contains(rect.other(), z));
                assert!(g.in_strip(z) && g.in_annulus(z));
            }
        }
    }

    #[test]
    fn sides_outside_the_rectangle() {
        let g = abs_geometry();
        let inner = g.point(RectangleId::M, 0.5, 0.5);
        let (e1, _) = g.energies(inner);
        assert!(e1 > 0.0);
        assert_eq!(g.locate(RectangleId::M, PhasePoint::new(inner.x, -inner.y)), Placement::Outside(Side::Other));
        // Lowering E_0 at fixed E_2 crosses the A side.
        let left = g.point(RectangleId::M, 0.0, 0.5);
        let nudged = PhasePoint::new(left.x - 1e-6, left.y);
        let (u, _) = g.coords(RectangleId::M, nudged);
        assert!(u < 0.0);
    }

    #[test]
    fn angle_places_rectangles_in_quadrants() {
        let g = abs_geometry();
        for i in 1..10 {
            let s = i as f64 / 10.0;
            let th_m = g.angle(g.point(RectangleId::M, s, 1.0 - s));
            let th_n = g.angle(g.point(RectangleId::N, s, 1.0 - s));
            assert!(th_m > 0.0 && th_m < std::f64::consts::FRAC_PI_2, "{th_m}");
            assert!(th_n > -std::f64::consts::FRAC_PI_2 && th_n < 0.0, "{th_n}");
        }
    }

    #[test]
    fn strip_and_annulus_are_invariant() {
        let opts = FlowOptions::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (f, k1, k2, levels) in [
            (Nonlinearity::abs(), 0.0, 2.0, Levels::abs_example(0.1)),
            (Nonlinearity::sqrt1p(), 2.0, 4.0, RegionGeometry::auto_levels(&Nonlinearity::sqrt1p(), 2.0, 4.0).unwrap()),
        ] {
            let g = RegionGeometry::build(&f, k1, k2, levels).unwrap();
            let osc1 = Oscillator::autonomous(f.clone(), k1);
            let osc2 = Oscillator::autonomous(f.clone(), k2);
            let scale = levels.b - levels.a;
            for _ in 0..100 {
                let rect = if rng.gen::<bool>() { RectangleId::M } else { RectangleId::N };
                let z = g.point(rect, rng.gen(), rng.gen());
                let t: f64 = rng.gen_range(0.0..3.0);
                let w = osc1.flow(z, 0.0, t, &opts).unwrap();
                let (e1, _) = g.energies(w);
                assert!(e1 >= levels.a - 1e-8 * scale && e1 <= levels.b + 1e-8 * scale);
                assert!(g.in_strip(w) || (e1 - levels.a).abs() < 1e-8 * scale);
                let w2 = osc2.flow(z, 0.0, t, &opts).unwrap();
                assert!(w2.x >= g.frame_k2().x_u());
                let e2 = g.frame_k2().energy(w2);
                assert!(e2 >= levels.d - 1e-8 && e2 <= g.frame_k2().phi_at_xu() + 1e-8);
            }
        }
    }
}
