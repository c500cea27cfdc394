use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::quad;
use crate::roots;

/// Regularity class of a nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    /// Continuous and Lipschitz, with derivative jumps at the breakpoints.
    C0Lipschitz,
    /// At least twice continuously differentiable.
    C2Plus,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Custom {
    f: ScalarFn,
    df: ScalarFn,
    potential: Option<ScalarFn>,
}

#[derive(Clone)]
enum Kind {
    Abs,
    Sqrt1p,
    Custom(Custom),
}

/// A nonlinearity f with f(0) = 0, strictly decreasing on (-inf, 0] and
/// strictly increasing on [0, inf), f -> +inf at both ends.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    kind: Kind,
    breakpoints: Vec<f64>,
    smoothness: Smoothness,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("breakpoints", &self.breakpoints)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// Grid half-width and resolution for the construction-time shape check.
const CHECK_HALF_WIDTH: f64 = 100.0;
const CHECK_POINTS: usize = 2001;
const GROWTH_PROBE: f64 = 1e6;

impl Nonlinearity {
    /// f(s) = |s|.
    pub fn abs() -> Self {
        Self {
            name: "abs".into(),
            kind: Kind::Abs,
            breakpoints: vec![0.0],
            smoothness: Smoothness::C0Lipschitz,
        }
    }

    /// f(s) = sqrt(1 + s^2) - 1.
    pub fn sqrt1p() -> Self {
        Self {
            name: "sqrt1p".into(),
            kind: Kind::Sqrt1p,
            breakpoints: Vec::new(),
            smoothness: Smoothness::C2Plus,
        }
    }

    /// Looks up a catalog entry.
    pub fn from_name(name: &str) -> Result<Self, ModelError> {
        match name {
            "abs" => Ok(Self::abs()),
            "sqrt1p" => Ok(Self::sqrt1p()),
            other => Err(ModelError::UnknownNonlinearity(other.to_string())),
        }
    }

    pub fn catalog() -> &'static [&'static str] {
        &["abs", "sqrt1p"]
    }

    /// User-supplied nonlinearity. The shape hypotheses are checked on a
    /// finite grid plus a growth probe at +-1e6; the check is not exhaustive.
    /// Without a closed-form potential F is computed by adaptive quadrature.
    pub fn custom<F, D>(
        name: impl Into<String>,
        f: F,
        df: D,
        breakpoints: Vec<f64>,
        smoothness: Smoothness,
    ) -> Result<Self, ModelError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut bps = breakpoints;
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let nl = Self {
            name: name.into(),
            kind: Kind::Custom(Custom {
                f: Arc::new(f),
                df: Arc::new(df),
                potential: None,
            }),
            breakpoints: bps,
            smoothness,
        };
        nl.check_shape()?;
        Ok(nl)
    }

    /// Attaches a closed-form potential to a custom nonlinearity.
    pub fn with_potential<P>(mut self, potential: P) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Kind::Custom(c) = &mut self.kind {
            c.potential = Some(Arc::new(potential));
        }
        self
    }

    fn check_shape(&self) -> Result<(), ModelError> {
        let f0 = self.eval(0.0);
        if f0.abs() > 1e-12 {
            return Err(ModelError::Hypothesis(format!("f(0) = {f0} is not zero")));
        }
        let half = CHECK_POINTS / 2;
        let step = CHECK_HALF_WIDTH / half as f64;
        let mut prev = f0;
        let mut max_seen: f64 = 0.0;
        for i in 1..=half {
            let s = i as f64 * step;
            let v = self.eval(s);
            if !(v > prev) {
                return Err(ModelError::Hypothesis(format!(
                    "f is not strictly increasing near s = {s}"
                )));
            }
            prev = v;
            max_seen = max_seen.max(v);
        }
        prev = f0;
        for i in 1..=half {
            let s = -(i as f64) * step;
            let v = self.eval(s);
            if !(v > prev) {
                return Err(ModelError::Hypothesis(format!(
                    "f is not strictly decreasing near s = {s}"
                )));
            }
            prev = v;
            max_seen = max_seen.max(v);
        }
        for probe in [GROWTH_PROBE, -GROWTH_PROBE] {
            let v = self.eval(probe);
            if !(v.is_finite() && v > max_seen) {
                return Err(ModelError::Hypothesis(format!(
                    "f does not grow at s = {probe}: f = {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True for the built-in f(s) = |s|, whose flows have a closed form.
    pub fn is_abs(&self) -> bool {
        matches!(self.kind, Kind::Abs)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Abs => s.abs(),
            Kind::Sqrt1p => s * s / ((1.0 + s * s).sqrt() + 1.0),
            Kind::Custom(c) => (c.f)(s),
        }
    }

    /// f'(s); at a breakpoint the right derivative is returned.
    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Abs => {
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Sqrt1p => s / (1.0 + s * s).sqrt(),
            Kind::Custom(c) => (c.df)(s),
        }
    }

    /// F(s) = integral of f from 0 to s.
    pub fn potential(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Abs => 0.5 * s * s.abs(),
            Kind::Sqrt1p => {
                if s.abs() < 1e-3 {
                    let s2 = s * s;
                    s * s2 * (1.0 / 6.0 - s2 * (1.0 / 40.0 - s2 / 112.0))
                } else {
                    0.5 * (s * (1.0 + s * s).sqrt() + s.asinh()) - s
                }
            }
            Kind::Custom(c) => match &c.potential {
                Some(p) => p(s),
                None => self.integrate_f(0.0, s),
            },
        }
    }

    /// F(b) - F(a) computed without cancellation for nearby a, b.
    pub fn potential_diff(&self, a: f64, b: f64) -> f64 {
        self.potential_increment(a, b - a)
    }

    /// F(a + d) - F(a). For |d| <= 0.5 the offset d is used as the exact
    /// interval length, so the result keeps full relative accuracy even when
    /// a + d is not representable.
    pub fn potential_increment(&self, a: f64, d: f64) -> f64 {
        if d == 0.0 {
            return 0.0;
        }
        if d.abs() > 0.5 {
            return self.potential(a + d) - self.potential(a);
        }
        let (lo, hi) = if d > 0.0 { (a, a + d) } else { (a + d, a) };
        let cuts: Vec<f64> = self.breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
        if cuts.is_empty() {
            return d * quad::gauss_legendre_10(|t| self.eval(a + d * t), 0.0, 1.0);
        }
        // Offsets (relative to a) of the piece boundaries, in integration order.
        let mut offs = vec![0.0];
        let mut inner: Vec<f64> = cuts.iter().map(|&p| p - a).collect();
        if d < 0.0 {
            inner.reverse();
        }
        offs.extend(inner);
        offs.push(d);
        let mut acc = quad::CompensatedSum::new();
        for w in offs.windows(2) {
            let (u, v) = (w[0], w[1]);
            let len = v - u;
            acc.add(len * quad::gauss_legendre_10(|t| self.eval(a + u + len * t), 0.0, 1.0));
        }
        acc.value()
    }

    /// Integral of f over [a, b], split at breakpoints.
    pub fn integrate_f(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|&p| p > lo && p < hi));
        cuts.push(hi);
        let mut acc = quad::CompensatedSum::new();
        for w in cuts.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r - l <= 0.5 {
                acc.add(quad::gauss_legendre_10(|s| self.eval(s), l, r));
            } else {
                let q = quad::integrate(|s| self.eval(s), l, r, 1e-15, 1e-15, 2000);
                acc.add(q.value);
            }
        }
        sign * acc.value()
    }

    /// Index of the smooth piece containing s (pieces are separated by the
    /// breakpoints; a breakpoint belongs to the piece on its right).
    pub fn branch_of(&self, s: f64) -> usize {
        self.breakpoints.iter().take_while(|&&p| s >= p).count()
    }

    /// Smooth extension of piece `branch` evaluated at s. For the catalog
    /// `abs` this is -s on the left piece and s on the right piece; for other
    /// nonlinearities it is f itself (adequate near the breakpoint because f
    /// is continuous).
    pub fn eval_on_branch(&self, s: f64, branch: usize) -> f64 {
        match &self.kind {
            Kind::Abs => {
                if branch == 0 {
                    -s
                } else {
                    s
                }
            }
            _ => self.eval(s),
        }
    }

    /// Left inverse f_l^{-1}(k) <= 0 for k >= 0.
    pub fn inverse_left(&self, k: f64) -> Result<f64, ModelError> {
        if k < 0.0 {
            return Err(ModelError::NegativeLevel(k));
        }
        Ok(match &self.kind {
            Kind::Abs => -k,
            Kind::Sqrt1p => -(k * (k + 2.0)).sqrt(),
            Kind::Custom(_) => {
                if k == 0.0 {
                    0.0
                } else {
                    roots::root_on_ray(|s| self.eval(s) - k, 0.0, -1.0, 1.0, 0.0)?
                }
            }
        })
    }

    /// Right inverse f_r^{-1}(k) >= 0 for k >= 0.
    pub fn inverse_right(&self, k: f64) -> Result<f64, ModelError> {
        if k < 0.0 {
            return Err(ModelError::NegativeLevel(k));
        }
        Ok(match &self.kind {
            Kind::Abs => k,
            Kind::Sqrt1p => (k * (k + 2.0)).sqrt(),
            Kind::Custom(_) => {
                if k == 0.0 {
                    0.0
                } else {
                    roots::root_on_ray(|s| self.eval(s) - k, 0.0, 1.0, 1.0, 0.0)?
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_lookup() {
        assert_eq!(Nonlinearity::from_name("abs").unwrap().name(), "abs");
        assert!(Nonlinearity::from_name("cubic").is_err());
    }

    #[test]
    fn sqrt1p_potential_series_and_closed_form_agree_at_switch() {
        let f = Nonlinearity::sqrt1p();
        let s = 1e-3;
        let closed = 0.5 * (s * (1.0f64 + s * s).sqrt() + s.asinh()) - s;
        assert!((f.potential(s) - closed).abs() < 1e-18);
    }

    #[test]
    fn custom_rejects_non_monotone() {
        let r = Nonlinearity::custom("bad", |s: f64| s * s * (s - 1.0).abs(), |s| s, vec![], Smoothness::C2Plus);
        assert!(r.is_err());
        let r = Nonlinearity::custom("shift", |s: f64| s * s + 1.0, |s| 2.0 * s, vec![], Smoothness::C2Plus);
        assert!(matches!(r, Err(ModelError::Hypothesis(_))));
    }

    #[test]
    fn custom_quadratic_matches_closed_form() {
        let f = Nonlinearity::custom("sq", |s: f64| s * s, |s| 2.0 * s, vec![], Smoothness::C2Plus).unwrap();
        assert!((f.potential(3.0) - 9.0).abs() < 1e-12);
        assert!((f.inverse_left(4.0).unwrap() + 2.0).abs() < 1e-12);
        assert!((f.inverse_right(4.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn branch_extension_of_abs() {
        let f = Nonlinearity::abs();
        assert_eq!(f.branch_of(-1.0), 0);
        assert_eq!(f.branch_of(0.0), 1);
        assert_eq!(f.eval_on_branch(0.5, 0), -0.5);
    }

    proptest! {
        #[test]
        fn potential_derivative_is_f(s in -20.0f64..20.0) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let h = 1e-5;
                if f.breakpoints().iter().any(|p| (s - p).abs() < 2.0 * h) { continue; }
                let fd = (f.potential(s + h) - f.potential(s - h)) / (2.0 * h);
                prop_assert!((fd - f.eval(s)).abs() < 1e-6 * (1.0 + s.abs()));
            }
        }

        #[test]
        fn potential_diff_is_consistent(a in -10.0f64..10.0, d in -0.4f64..0.4) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let direct = f.potential(a + d) - f.potential(a);
                prop_assert!((f.potential_diff(a, a + d) - direct).abs() < 1e-12 * (1.0 + a * a));
            }
        }

        #[test]
        fn inverses_invert(k in 0.0f64..50.0) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let l = f.inverse_left(k).unwrap();
                let r = f.inverse_right(k).unwrap();
                prop_assert!(l <= 0.0 && r >= 0.0);
                prop_assert!((f.eval(l) - k).abs() < 1e-12 * (1.0 + k));
                prop_assert!((f.eval(r) - k).abs() < 1e-12 * (1.0 + k));
            }
        }
    }
}
