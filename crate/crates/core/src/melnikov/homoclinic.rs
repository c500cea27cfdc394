use serde::Serialize;

use super::MelnikovError;
use crate::model::{EnergyFrame, Nonlinearity, Smoothness};
use crate::quad::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    /// Target spacing of the interpolation nodes in t.
    pub node_spacing: f64,
    /// The tail model takes over once q~ < tail_rel * q~(0).
    pub tail_rel: f64,
    pub rel_tol: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { node_spacing: 0.02, tail_rel: 1e-10, rel_tol: 1e-13 }
    }
}

/// The even homoclinic solution q(t) with q(0) = x_h, q'(0) = 0 and
/// q(t) -> x_u as |t| -> inf.
///
/// Nodes are placed by inverting t(x) = int_x^{x_h} ds / sqrt(2 (Phi(x_u) - Phi(s)));
/// q is interpolated between nodes by quintic Hermite data (q, q', q'') and
/// continued by x_u + C e^{-lambda t} past the last node.
#[derive(Debug, Clone)]
pub struct HomoclinicOrbit {
    frame: EnergyFrame,
    lambda: f64,
    t: Vec<f64>,
    /// q~ = q - x_u at the nodes, kept as an offset for accuracy near the saddle.
    qt: Vec<f64>,
    dq: Vec<f64>,
    ddq: Vec<f64>,
    tail_c: f64,
    kinetic: f64,
}

/// Node data for inspection and export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitSample {
    pub t: f64,
    pub q: f64,
    pub q_prime: f64,
}

impl HomoclinicOrbit {
    pub fn new(f: Nonlinearity, k: f64) -> Result<Self, MelnikovError> {
        Self::with_options(f, k, &OrbitOptions::default())
    }

    pub fn with_options(f: Nonlinearity, k: f64, opts: &OrbitOptions) -> Result<Self, MelnikovError> {
        if f.smoothness() != Smoothness::C2Plus {
            return Err(MelnikovError::Ineligible(f.name().to_string()));
        }
        if !(k > 0.0) {
            return Err(MelnikovError::Domain(format!("need k > 0 for a homoclinic loop, got {k}")));
        }
        let frame = EnergyFrame::new(f, k)?;
        let x_u = frame.x_u();
        let x_h = frame.x_h().ok_or_else(|| MelnikovError::Construction("no right intercept".into()))?;
        let lambda = (-frame.nonlinearity().derivative(x_u)).sqrt();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(MelnikovError::Construction(format!("saddle is not hyperbolic, f'(x_u) = {}", -lambda * lambda)));
        }
        let width = x_h - x_u;
        let gap_h = |d: f64| -frame.phi_increment(x_h, d);
        let gap = |qt: f64| {
            if qt < 0.5 * width {
                -frame.phi_increment(x_u, qt)
            } else {
                -frame.phi_increment(x_h, qt - width)
            }
        };
        let accel = |qt: f64| -frame.phi_prime(x_u + qt);
        let mut t = vec![0.0];
        let mut qt = vec![width];
        let mut dq = vec![0.0];
        let mut ddq = vec![accel(width)];
        let h = opts.node_spacing;
        let slope_h = frame.phi_prime(x_h);
        let stop = opts.tail_rel * width;
        while *qt.last().unwrap() >= stop {
            let j = qt.len() - 1;
            let (q0, d1, d2) = (qt[j], dq[j], ddq[j]);
            let d3 = -frame.nonlinearity().derivative(x_u + q0) * d1;
            let mut q1 = q0 + h * (d1 + h * (d2 / 2.0 + h * d3 / 6.0));
            if !(q1 >= 0.5 * q0) {
                q1 = 0.5 * q0;
            }
            if !(q1 < q0) {
                return Err(MelnikovError::Construction(format!("node predictor stalled at q~ = {q0}")));
            }
            let dt = if j == 0 {
                // s = x_h - sigma^2 removes the turning-point singularity.
                let smax = (q0 - q1).sqrt();
                let g = |sigma: f64| {
                    if sigma == 0.0 {
                        return 2.0 / (2.0 * slope_h).sqrt();
                    }
                    let mut gp = gap_h(-sigma * sigma);
                    if !(gp > 0.0) {
                        gp = slope_h * sigma * sigma;
                    }
                    2.0 * sigma / (2.0 * gp).sqrt()
                };
                quad::integrate(g, 0.0, smax, 1e-16, opts.rel_tol, 400)
            } else {
                quad::integrate(|s: f64| 1.0 / (2.0 * gap(s)).sqrt(), q1, q0, 1e-16, opts.rel_tol, 400)
            };
            if !(dt.value.is_finite() && dt.value > 0.0) {
                return Err(MelnikovError::Construction(format!("segment time {} at q~ = {q0}", dt.value)));
            }
            t.push(t[j] + dt.value);
            qt.push(q1);
            dq.push(-(2.0 * gap(q1).max(0.0)).sqrt());
            ddq.push(accel(q1));
        }
        let (t_last, q_last) = (*t.last().unwrap(), *qt.last().unwrap());
        let tail_c = q_last * (lambda * t_last).exp();
        let mut orbit = Self { frame, lambda, t, qt, dq, ddq, tail_c, kinetic: 0.0 };
        let body = orbit.integrate(0.0, t_last, |_, _, d| d * d);
        orbit.kinetic = body + 0.5 * lambda * q_last * q_last;
        Ok(orbit)
    }

    pub fn frame(&self) -> &EnergyFrame {
        &self.frame
    }

    pub fn x_u(&self) -> f64 {
        self.frame.x_u()
    }

    pub fn x_h(&self) -> f64 {
        self.frame.x_u() + self.qt[0]
    }

    /// Decay rate sqrt(-f'(x_u)).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Time past which the exponential tail model is used.
    pub fn t_tail(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// C in q~(t) = C e^{-lambda t} for t >= t_tail.
    pub fn tail_constant(&self) -> f64 {
        self.tail_c
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    /// int_0^inf q'(t)^2 dt.
    pub fn half_kinetic_integral(&self) -> f64 {
        self.kinetic
    }

    fn locate(&self, t: f64) -> usize {
        self.t.partition_point(|&tj| tj <= t).saturating_sub(1).min(self.t.len() - 2)
    }

    /// (q~, q') at t >= 0.
    fn eval_pos(&self, t: f64) -> (f64, f64) {
        if t >= self.t_tail() {
            let e = self.tail_c * (-self.lambda * t).exp();
            return (e, -self.lambda * e);
        }
        let j = self.locate(t);
        let h = self.t[j + 1] - self.t[j];
        let s = (t - self.t[j]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let b = [
            1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
            s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
            0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
            10.0 * s3 - 15.0 * s4 + 6.0 * s5,
            -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
            0.5 * s3 - s4 + 0.5 * s5,
        ];
        let db = [
            -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
            1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
            s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
            30.0 * s2 - 60.0 * s3 + 30.0 * s4,
            -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
            1.5 * s2 - 4.0 * s3 + 2.5 * s4,
        ];
        let v = [
            self.qt[j],
            h * self.dq[j],
            h * h * self.ddq[j],
            self.qt[j + 1],
            h * self.dq[j + 1],
            h * h * self.ddq[j + 1],
        ];
        let mut q = 0.0;
        let mut d = 0.0;
        for i in 0..6 {
            q += b[i] * v[i];
            d += db[i] * v[i];
        }
        (q, d / h)
    }

    /// q~(t) = q(t) - x_u, even in t.
    pub fn q_tilde(&self, t: f64) -> f64 {
        self.eval_pos(t.abs()).0
    }

    pub fn q(&self, t: f64) -> f64 {
        self.x_u() + self.q_tilde(t)
    }

    /// q'(t), odd in t.
    pub fn q_prime(&self, t: f64) -> f64 {
        let d = self.eval_pos(t.abs()).1;
        if t < 0.0 {
            -d
        } else {
            d
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = OrbitSample> + '_ {
        (0..self.t.len()).map(|j| OrbitSample { t: self.t[j], q: self.x_u() + self.qt[j], q_prime: self.dq[j] })
    }

    /// max over nodes of |E(q, q') - Phi(x_u)|.
    pub fn energy_residual(&self) -> f64 {
        let x_u = self.x_u();
        self.qt
            .iter()
            .zip(&self.dq)
            .map(|(&qt, &d)| (0.5 * d * d + self.frame.phi_increment(x_u, qt)).abs())
            .fold(0.0, f64::max)
    }

    /// int_a^b g(t, q~(t), q'(t)) dt for 0 <= a <= b, with 10-point Gauss
    /// panels aligned to the nodes and no longer than `max_panel`.
    pub fn integrate_with<G: Fn(f64, f64, f64) -> f64>(&self, a: f64, b: f64, max_panel: f64, g: G) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut cuts: Vec<f64> = vec![a];
        let lo = self.t.partition_point(|&tj| tj <= a);
        cuts.extend(self.t[lo..].iter().copied().take_while(|&tj| tj < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let n = ((q - p) / max_panel).ceil().max(1.0) as usize;
            let step = (q - p) / n as f64;
            for i in 0..n {
                let l = p + step * i as f64;
                let r = if i + 1 == n { q } else { l + step };
                acc.add(quad::gauss_legendre_10(
                    |t| {
                        let (qt, d) = self.eval_pos(t);
                        g(t, qt, d)
                    },
                    l,
                    r,
                ));
            }
        }
        acc.value()
    }

    pub fn integrate<G: Fn(f64, f64, f64) -> f64>(&self, a: f64, b: f64, g: G) -> f64 {
        self.integrate_with(a, b, 1.0, g)
    }

    /// int_a^b q~ dt for 0 <= a <= b <= inf.
    pub fn integral_q_tilde(&self, a: f64, b: f64) -> f64 {
        let tt = self.t_tail();
        let l = self.lambda;
        let tail = |x: f64, y: f64| {
            let ey = if y.is_finite() { (-l * y).exp() } else { 0.0 };
            self.tail_c * ((-l * x).exp() - ey) / l
        };
        if a >= tt {
            return tail(a, b);
        }
        let body = self.integrate(a, b.min(tt), |_, q, _| q);
        if b > tt {
            body + tail(tt, b)
        } else {
            body
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit() -> HomoclinicOrbit {
        HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 2.0).unwrap()
    }

    #[test]
    fn endpoints_and_rate() {
        let o = orbit();
        assert!((o.q(0.0) - o.frame().x_h().unwrap()).abs() < 1e-14);
        assert_eq!(o.q_prime(0.0), 0.0);
        assert!((o.lambda() - (2.0 * 2f64.sqrt() / 3.0).sqrt()).abs() < 1e-12);
        assert!(o.energy_residual() < 1e-12);
    }

    #[test]
    fn even_monotone_and_energy_pinned_between_nodes() {
        let o = orbit();
        let fr = o.frame().clone();
        let mut prev = f64::INFINITY;
        for i in 0..4000 {
            let t = i as f64 * 0.0077;
            let q = o.q(t);
            assert_eq!(q, o.q(-t));
            assert_eq!(o.q_prime(t), -o.q_prime(-t));
            assert!(o.q_tilde(t) < prev || t == 0.0);
            prev = o.q_tilde(t);
            let e = 0.5 * o.q_prime(t).powi(2) + fr.phi_increment(fr.x_u(), o.q_tilde(t));
            assert!(e.abs() < 1e-9, "t = {t}: {e}");
        }
    }

    #[test]
    fn matches_direct_integration_near_the_turning_point() {
        // Short forward flow from (x_h, 0) is well conditioned.
        use crate::flow::{FlowOptions, Oscillator};
        use crate::point::PhasePoint;
        let o = orbit();
        let osc = Oscillator::autonomous(Nonlinearity::sqrt1p(), 2.0);
        let opts = FlowOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        for t in [0.5, 1.0, 2.0, 3.0] {
            let z = osc.flow(PhasePoint::new(o.x_h(), 0.0), 0.0, t, &opts).unwrap();
            assert!((z.x - o.q(t)).abs() < 1e-9, "t = {t}");
            assert!((z.y - o.q_prime(t)).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn kinetic_integral_is_half_the_loop_area() {
        let o = orbit();
        let s = super::super::loop_area_at(&Nonlinearity::sqrt1p(), 2.0).unwrap();
        assert!((2.0 * o.half_kinetic_integral() - s).abs() < 1e-9 * s);
    }

    #[test]
    fn non_smooth_and_nonpositive_k_rejected() {
        assert!(matches!(HomoclinicOrbit::new(Nonlinearity::abs(), 2.0), Err(MelnikovError::Ineligible(_))));
        assert!(matches!(HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 0.0), Err(MelnikovError::Domain(_))));
    }
}
