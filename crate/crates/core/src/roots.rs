//! Scalar root finding on brackets.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("bracket expansion from {start} did not find a sign change")]
    BracketExpansion { start: f64 },
    #[error("non-finite function value at {at}")]
    NonFinite { at: f64 },
}

/// Brent's method: bisection safeguarded secant / inverse quadratic steps.
///
/// Terminates when the bracket is narrower than `x_tol + 4 eps |x|` or an
/// exact zero is hit. The returned point always keeps a sign change with the
/// other bracket end.
pub fn brent<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, x_tol: f64) -> Result<f64, RootError> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = g(a);
    let mut fb = g(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { at: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { at: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..400 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = g(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { at: b });
        }
    }
    Ok(b)
}

/// Plain bisection keeping `g(lo)` and `g(hi)` of opposite sign; returns the
/// final bracket after `iters` halvings (or earlier if it collapses).
pub fn bisect_bracket<G: FnMut(f64) -> f64>(mut g: G, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut g_lo = g(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return (mid, mid);
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Root of a monotone function on the ray starting at `anchor` and extending
/// in direction `dir` (+1 or -1). The bracket is grown geometrically from
/// `initial_step` until a sign change appears.
pub fn root_on_ray<G: FnMut(f64) -> f64>(
    mut g: G,
    anchor: f64,
    dir: f64,
    initial_step: f64,
    x_tol: f64,
) -> Result<f64, RootError> {
    let g0 = g(anchor);
    if g0 == 0.0 {
        return Ok(anchor);
    }
    let mut step = initial_step.max(1e-8);
    let mut near = anchor;
    for _ in 0..200 {
        let far = anchor + dir * step;
        let gf = g(far);
        if !gf.is_finite() {
            return Err(RootError::NonFinite { at: far });
        }
        if gf.signum() != g0.signum() || gf == 0.0 {
            let (lo, hi) = if near < far { (near, far) } else { (far, near) };
            return brent(g, lo, hi, x_tol);
        }
        near = far;
        step *= 2.0;
    }
    Err(RootError::BracketExpansion { start: anchor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn brent_reports_missing_sign_change() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 0.0),
            Err(RootError::NoSignChange { .. })
        ));
    }

    #[test]
    fn ray_search_expands() {
        let r = root_on_ray(|x| x - 1000.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((r - 1000.0).abs() < 1e-10);
        let l = root_on_ray(|x| x + 7.5, 0.0, -1.0, 0.5, 0.0).unwrap();
        assert!((l + 7.5).abs() < 1e-12);
    }

    #[test]
    fn bisection_shrinks_bracket() {
        let (lo, hi) = bisect_bracket(|x| x - 0.3, 0.0, 1.0, 60);
        assert!(lo <= 0.3 && 0.3 <= hi && hi - lo < 1e-15);
    }

    proptest! {
        #[test]
        fn brent_solves_shifted_exponentials(c in -5.0f64..5.0) {
            let r = brent(|x| x.exp() - c.exp(), -10.0, 10.0, 0.0).unwrap();
            prop_assert!((r - c).abs() < 1e-13);
        }
    }
}
