use serde::Serialize;

use super::{ModelError, Nonlinearity};
use crate::point::PhasePoint;
use crate::roots;

/// Default absolute tolerance on root residuals |Phi_k(r) - rho|.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// The autonomous system u'' + f(u) = k with its energy
/// E_k(x, y) = y^2 / 2 + Phi_k(x), Phi_k(x) = F(x) - k x.
///
/// For k > 0 the saddle x_u < 0 and the center x_s > 0 are the two
/// equilibria and Phi_k(x_u) > 0 > Phi_k(x_s). For k = 0 both collapse to 0.
#[derive(Debug, Clone)]
pub struct EnergyFrame {
    f: Nonlinearity,
    k: f64,
    x_u: f64,
    x_s: f64,
    phi_u: f64,
    phi_s: f64,
    x_h: Option<f64>,
    tol: f64,
}

/// Serializable summary of a frame.
#[derive(Debug, Clone, Serialize)]
pub struct FrameSummary {
    pub f: String,
    pub k: f64,
    pub x_u: f64,
    pub x_s: f64,
    pub phi_at_xu: f64,
    pub phi_at_xs: f64,
    pub x_h: Option<f64>,
}

impl EnergyFrame {
    pub fn new(f: Nonlinearity, k: f64) -> Result<Self, ModelError> {
        Self::with_tolerance(f, k, DEFAULT_ROOT_TOL)
    }

    pub fn with_tolerance(f: Nonlinearity, k: f64, tol: f64) -> Result<Self, ModelError> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(ModelError::NegativeLevel(k));
        }
        let x_u = f.inverse_left(k)?;
        let x_s = f.inverse_right(k)?;
        let mut frame = Self {
            f,
            k,
            x_u,
            x_s,
            phi_u: 0.0,
            phi_s: 0.0,
            x_h: None,
            tol,
        };
        frame.phi_u = frame.phi(x_u);
        frame.phi_s = frame.phi(x_s);
        if k > 0.0 {
            let level = frame.phi_u;
            // Anchor the gap at x_s, where Phi is smallest on the right branch.
            let gap = |x: f64| frame.phi_diff(x_s, x) - (level - frame.phi_s);
            let width = (x_s - x_u).max(1.0);
            frame.x_h = Some(roots::root_on_ray(gap, x_s, 1.0, width, 0.0)?);
        }
        Ok(frame)
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Saddle abscissa f_l^{-1}(k).
    pub fn x_u(&self) -> f64 {
        self.x_u
    }

    /// Center abscissa f_r^{-1}(k).
    pub fn x_s(&self) -> f64 {
        self.x_s
    }

    pub fn phi_at_xu(&self) -> f64 {
        self.phi_u
    }

    pub fn phi_at_xs(&self) -> f64 {
        self.phi_s
    }

    /// Right x-intercept of the homoclinic loop; `None` for k = 0.
    pub fn x_h(&self) -> Option<f64> {
        self.x_h
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.f.potential(x) - self.k * x
    }

    /// Phi_k'(x) = f(x) - k.
    pub fn phi_prime(&self, x: f64) -> f64 {
        self.f.eval(x) - self.k
    }

    /// Phi_k(b) - Phi_k(a), accurate when a and b are close.
    pub fn phi_diff(&self, a: f64, b: f64) -> f64 {
        self.phi_increment(a, b - a)
    }

    /// Phi_k(a + d) - Phi_k(a) with d taken as an exact offset.
    pub fn phi_increment(&self, a: f64, d: f64) -> f64 {
        self.f.potential_increment(a, d) - self.k * d
    }

    pub fn energy(&self, z: PhasePoint) -> f64 {
        0.5 * z.y * z.y + self.phi(z.x)
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            f: self.f.name().to_string(),
            k: self.k,
            x_u: self.x_u,
            x_s: self.x_s,
            phi_at_xu: self.phi_u,
            phi_at_xs: self.phi_s,
            x_h: self.x_h,
        }
    }

    /// x_*(rho): root of Phi_k = rho on (-inf, x_u]. Requires rho <= Phi_k(x_u).
    pub fn root_left(&self, rho: f64) -> Result<f64, ModelError> {
        if rho > self.phi_u + self.tol {
            return Err(ModelError::NoRoot { rho, branch: "left" });
        }
        if (rho - self.phi_u).abs() <= self.tol {
            return Ok(self.x_u);
        }
        let width = (self.x_s - self.x_u).max(1.0);
        Ok(roots::root_on_ray(|x| self.phi(x) - rho, self.x_u, -1.0, width, 0.0)?)
    }

    /// Root of Phi_k = rho on [x_u, x_s]; requires Phi_k(x_s) <= rho <= Phi_k(x_u).
    pub fn root_middle(&self, rho: f64) -> Result<f64, ModelError> {
        if rho > self.phi_u + self.tol || rho < self.phi_s - self.tol {
            return Err(ModelError::NoRoot { rho, branch: "middle" });
        }
        if (rho - self.phi_u).abs() <= self.tol {
            return Ok(self.x_u);
        }
        if (rho - self.phi_s).abs() <= self.tol {
            return Ok(self.x_s);
        }
        Ok(roots::brent(|x| self.phi(x) - rho, self.x_u, self.x_s, 0.0)?)
    }

    /// Root of Phi_k = rho on [x_s, inf); requires rho >= Phi_k(x_s).
    pub fn root_right(&self, rho: f64) -> Result<f64, ModelError> {
        if rho < self.phi_s - self.tol {
            return Err(ModelError::NoRoot { rho, branch: "right" });
        }
        if (rho - self.phi_s).abs() <= self.tol {
            return Ok(self.x_s);
        }
        if let Some(x_h) = self.x_h {
            if (rho - self.phi_u).abs() <= self.tol {
                return Ok(x_h);
            }
        }
        let width = (self.x_s - self.x_u).max(1.0);
        Ok(roots::root_on_ray(|x| self.phi(x) - rho, self.x_s, 1.0, width, 0.0)?)
    }
}

/// Saddle and homoclinic abscissas of two frames 0 <= k1 < k2.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub x_u_k1: f64,
    pub x_u_k2: f64,
    pub x_h_k1: f64,
    pub x_h_k2: f64,
    pub holds: bool,
}

/// Checks the nesting x_u(k2) < x_u(k1) <= x_h(k1) < x_h(k2) of the saddle
/// loops. With k1 = 0 the inner loop degenerates to the origin, x_h(0) = 0,
/// so the middle inequality is an equality.
pub fn ordering_check(f: &Nonlinearity, k1: f64, k2: f64) -> Result<OrderingReport, ModelError> {
    if !(k1 < k2) {
        return Err(ModelError::Ordering { k1, k2 });
    }
    let a = EnergyFrame::new(f.clone(), k1)?;
    let b = EnergyFrame::new(f.clone(), k2)?;
    let x_h_k1 = a.x_h().unwrap_or(0.0);
    let x_h_k2 = b.x_h().unwrap_or(0.0);
    let middle = if k1 == 0.0 { a.x_u() <= x_h_k1 } else { a.x_u() < x_h_k1 };
    Ok(OrderingReport {
        x_u_k1: a.x_u(),
        x_u_k2: b.x_u(),
        x_h_k1,
        x_h_k2,
        holds: b.x_u() < a.x_u() && middle && x_h_k1 < x_h_k2,
    })
}

/// Equilibria (x_u, x_s) of u'' + f(u) = k.
pub fn equilibria(f: &Nonlinearity, k: f64) -> Result<(f64, f64), ModelError> {
    if !(k >= 0.0) {
        return Err(ModelError::NegativeLevel(k));
    }
    Ok((f.inverse_left(k)?, f.inverse_right(k)?))
}

/// Right x-intercept of the homoclinic loop, k > 0.
pub fn homoclinic_intercept(f: &Nonlinearity, k: f64) -> Result<f64, ModelError> {
    if !(k > 0.0) {
        return Err(ModelError::DegenerateLoop(k));
    }
    let frame = EnergyFrame::new(f.clone(), k)?;
    Ok(frame.x_h().expect("k > 0 frames carry x_h"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn abs_frame_values() {
        let fr = EnergyFrame::new(Nonlinearity::abs(), 2.0).unwrap();
        assert_eq!((fr.x_u(), fr.x_s()), (-2.0, 2.0));
        assert_abs_diff_eq!(fr.phi(-2.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fr.x_h().unwrap(), 2.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        let z = EnergyFrame::new(Nonlinearity::abs(), 0.0).unwrap();
        assert_eq!(z.phi(4.0), 8.0);
        assert_eq!(z.energy(PhasePoint::new(0.0, 4.0)), 8.0);
        assert!(z.x_h().is_none());
    }

    #[test]
    fn sqrt1p_intercept_matches_independent_bisection() {
        // Independent oracle: plain bisection on the closed-form potential.
        let big_f = |x: f64| 0.5 * (x * (1.0 + x * x).sqrt() + x.asinh()) - x;
        let xu = -(8f64).sqrt();
        let level = big_f(xu) - 2.0 * xu;
        let (mut lo, mut hi) = (8f64.sqrt(), 20.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if big_f(m) - 2.0 * m < level {
                lo = m;
            } else {
                hi = m;
            }
        }
        let x_h = homoclinic_intercept(&Nonlinearity::sqrt1p(), 2.0).unwrap();
        assert_abs_diff_eq!(x_h, lo, epsilon = 1e-10);
        assert!((x_h - 6.556).abs() < 5e-4);
    }

    #[test]
    fn intercept_rejects_zero_level() {
        assert!(homoclinic_intercept(&Nonlinearity::abs(), 0.0).is_err());
        assert!(equilibria(&Nonlinearity::abs(), -1.0).is_err());
    }

    #[test]
    fn ordering_examples() {
        let r = ordering_check(&Nonlinearity::abs(), 2.0, 4.0).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.x_h_k2, 4.0 + 4.0 * 2f64.sqrt(), epsilon = 1e-11);
        assert!(ordering_check(&Nonlinearity::sqrt1p(), 2.0, 4.0).unwrap().holds);
        assert!(ordering_check(&Nonlinearity::abs(), 2.0, 2.0).is_err());
        assert!(ordering_check(&Nonlinearity::abs(), 0.0, 1.0).unwrap().holds);
    }

    proptest! {
        #[test]
        fn energy_on_axis_is_phi(x in -50.0f64..50.0, k in 0.0f64..10.0) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let fr = EnergyFrame::new(f, k).unwrap();
                prop_assert_eq!(fr.energy(PhasePoint::new(x, 0.0)), fr.phi(x));
            }
        }

        #[test]
        fn phi_is_n_shaped(k in 0.05f64..10.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a != b);
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let fr = EnergyFrame::new(f, k).unwrap();
                let (xu, xs) = (fr.x_u(), fr.x_s());
                let (x1, x2) = (xu + a * (xs - xu), xu + b * (xs - xu));
                prop_assert!(fr.phi(x1) > fr.phi(x2));
                let (y1, y2) = (xs + a * 10.0, xs + b * 10.0);
                prop_assert!(fr.phi(y1) < fr.phi(y2));
                let (w1, w2) = (xu - 10.0 * b, xu - 10.0 * a);
                prop_assert!(fr.phi(w1) < fr.phi(w2));
            }
        }

        #[test]
        fn saddle_above_center(k in 1e-3f64..20.0) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let fr = EnergyFrame::new(f, k).unwrap();
                prop_assert!(fr.x_u() < 0.0 && 0.0 < fr.x_s());
                prop_assert!(fr.phi_at_xu() > 0.0 && fr.phi_at_xs() < 0.0);
                let xh = fr.x_h().unwrap();
                prop_assert!(xh > fr.x_s());
                prop_assert!((fr.phi(xh) - fr.phi_at_xu()).abs() < 1e-10 * (1.0 + fr.phi_at_xu()));
            }
        }
    }
}
