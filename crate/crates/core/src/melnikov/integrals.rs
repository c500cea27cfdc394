use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{HomoclinicOrbit, MelnikovError};
use crate::flow::Waveform;

/// A Melnikov value with the bound on the neglected tail |t| > t_cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub alpha: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub t_cut: f64,
}

fn check_waveform(p0: &Waveform, omega: f64) -> Result<(), MelnikovError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(MelnikovError::Domain(format!("omega = {omega} must be positive")));
    }
    let mean = p0.mean();
    if mean.abs() > 1e-10 * p0.sup_norm().max(1.0) {
        return Err(MelnikovError::Domain(format!("forcing profile must have zero mean, got {mean}")));
    }
    Ok(())
}

/// Panel cap for integrands oscillating like cos(omega t).
fn panel(omega: f64) -> f64 {
    (PI / omega).min(1.0)
}

/// Cut-off with 2 ||p0|| q~(t_cut) <= tol, never before the tail model starts.
fn cut_time(q: &HomoclinicOrbit, sup: f64, tol: f64) -> f64 {
    if sup == 0.0 {
        return q.t_tail();
    }
    let t = (2.0 * sup * q.tail_constant() / tol).ln() / q.lambda();
    t.max(q.t_tail())
}

/// Delta(alpha) = int q'(t) [p0(omega (t + alpha)) - c0 q'(t)] dt over R.
///
/// Folded onto t >= 0 using that q' is odd. The c0 term is exact up to
/// quadrature; the forcing term is cut at t_cut with the reported bound.
pub fn delta(q: &HomoclinicOrbit, p0: &Waveform, omega: f64, alpha: f64, c0: f64) -> Result<DeltaEstimate, MelnikovError> {
    check_waveform(p0, omega)?;
    let sup = p0.sup_norm();
    let tol = 1e-15 * sup.max(1.0);
    let t_cut = cut_time(q, sup, tol);
    Ok(delta_cut(q, p0, omega, alpha, c0, t_cut))
}

pub(crate) fn delta_cut(q: &HomoclinicOrbit, p0: &Waveform, omega: f64, alpha: f64, c0: f64, t_cut: f64) -> DeltaEstimate {
    let forced = q.integrate_with(0.0, t_cut, panel(omega), |t, _, d| {
        d * (p0.value(omega * (t + alpha)) - p0.value(omega * (alpha - t)))
    });
    let value = forced - c0 * 2.0 * q.half_kinetic_integral();
    DeltaEstimate { alpha, value, tail_bound: 2.0 * p0.sup_norm() * q.q_tilde(t_cut), t_cut }
}

/// Delta on a list of phases, evaluated in parallel, in input order.
pub fn delta_curve(
    q: &HomoclinicOrbit,
    p0: &Waveform,
    omega: f64,
    alphas: &[f64],
    c0: f64,
) -> Result<Vec<DeltaEstimate>, MelnikovError> {
    check_waveform(p0, omega)?;
    alphas.par_iter().map(|&a| delta(q, p0, omega, a, c0)).collect()
}

/// int_0^inf q~(t) dt.
pub fn total_excursion(q: &HomoclinicOrbit) -> f64 {
    q.integral_q_tilde(0.0, f64::INFINITY)
}

/// eta(omega) = int_0^inf q~(t) cos(omega t) dt, with the exponential tail
/// integrated in closed form.
pub fn eta(q: &HomoclinicOrbit, omega: f64) -> f64 {
    let tt = q.t_tail();
    let (l, c) = (q.lambda(), q.tail_constant());
    let body = q.integrate_with(0.0, tt, panel(omega.max(1e-300)), |t, qt, _| qt * (omega * t).cos());
    let (co, si) = ((omega * tt).cos(), (omega * tt).sin());
    body + c * (-l * tt).exp() * (l * co - omega * si) / (l * l + omega * omega)
}

/// int_0^inf q~(t) sin(omega t) dt.
pub fn sine_transform(q: &HomoclinicOrbit, omega: f64) -> f64 {
    let tt = q.t_tail();
    let (l, c) = (q.lambda(), q.tail_constant());
    let body = q.integrate_with(0.0, tt, panel(omega.max(1e-300)), |t, qt, _| qt * (omega * t).sin());
    let (co, si) = ((omega * tt).cos(), (omega * tt).sin());
    body + c * (-l * tt).exp() * (l * si + omega * co) / (l * l + omega * omega)
}

/// eta'(omega) = -int_0^inf t q~(t) sin(omega t) dt.
pub fn eta_derivative(q: &HomoclinicOrbit, omega: f64) -> f64 {
    // t e^{-lambda t} < 1e-18 C well before this cut.
    let t_cut = q.t_tail() + 50.0 / q.lambda();
    -q.integrate_with(0.0, t_cut, panel(omega), |t, qt, _| t * qt * (omega * t).sin())
}

/// Xi_j = int_0^pi q~((t + j pi) / omega) sin t dt for j = 0..=j_max.
pub fn xi_terms(q: &HomoclinicOrbit, omega: f64, j_max: usize) -> Vec<f64> {
    (0..=j_max)
        .map(|j| {
            let a = j as f64 * PI / omega;
            let b = (j + 1) as f64 * PI / omega;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * omega * q.integrate_with(a, b, panel(omega), |t, qt, _| qt * (omega * t).sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Nonlinearity;
    use std::sync::OnceLock;

    fn orbit() -> &'static HomoclinicOrbit {
        static O: OnceLock<HomoclinicOrbit> = OnceLock::new();
        O.get_or_init(|| HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 2.0).unwrap())
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let d = delta(orbit(), &Waveform::Zero, 1.0, 0.3, 0.0).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn sine_closed_form() {
        let q = orbit();
        for omega in [0.5, 1.0, 2.0] {
            let amp = 2.0 * omega * eta(q, omega);
            for i in 0..32 {
                let alpha = 2.0 * PI / omega * i as f64 / 32.0;
                let d = delta(q, &Waveform::Sin, omega, alpha, 0.0).unwrap();
                let want = -amp * (omega * alpha).cos();
                assert!((d.value - want).abs() < 1e-9 * amp.abs(), "omega {omega} alpha {alpha}");
            }
        }
    }

    #[test]
    fn damping_shifts_by_loop_area() {
        let q = orbit();
        let a = delta(q, &Waveform::Sin, 1.0, 0.4, 0.0).unwrap().value;
        let b = delta(q, &Waveform::Sin, 1.0, 0.4, 0.1).unwrap().value;
        let s = crate::melnikov::loop_area_at(&Nonlinearity::sqrt1p(), 2.0).unwrap();
        assert!(((a - b) - 0.1 * s).abs() < 1e-9 * s);
    }

    #[test]
    fn mean_over_period_vanishes() {
        let q = orbit();
        let p0 = Waveform::Fourier { cos: vec![0.2, 0.5], sin: vec![1.0] };
        let omega = 1.3;
        let n = 64;
        let alphas: Vec<f64> = (0..n).map(|i| 2.0 * PI / omega * i as f64 / n as f64).collect();
        let vals = delta_curve(q, &p0, omega, &alphas, 0.0).unwrap();
        let mean = vals.iter().map(|d| d.value).sum::<f64>() / n as f64;
        let scale = vals.iter().map(|d| d.value.abs()).fold(0.0, f64::max);
        assert!(mean.abs() < 1e-12 * scale);
    }

    #[test]
    fn tail_bound_is_honest() {
        let q = orbit();
        let d = delta(q, &Waveform::Cos, 0.7, 1.1, 0.0).unwrap();
        let d2 = delta_cut(q, &Waveform::Cos, 0.7, 1.1, 0.0, 2.0 * d.t_cut);
        assert!((d.value - d2.value).abs() <= d.tail_bound);
    }

    #[test]
    fn eta_limits() {
        let q = orbit();
        let total = total_excursion(q);
        assert!(total > 0.0);
        assert!((eta(q, 1e-3) - total).abs() < 1e-4 * total);
        assert!(eta(q, 100.0) < eta(q, 1.0) / 100.0);
    }

    #[test]
    fn xi_alternating_sum_is_the_scaled_sine_transform() {
        let q = orbit();
        for omega in [0.5, 1.0, 3.0] {
            let xi = xi_terms(q, omega, 400);
            let alt: f64 = xi.iter().enumerate().map(|(j, x)| if j % 2 == 0 { *x } else { -*x }).sum();
            let st = omega * sine_transform(q, omega);
            assert!((alt - st).abs() < 1e-10, "omega {omega}: {alt} vs {st}");
            assert!(xi[0] - xi[1] <= alt && alt <= xi[0]);
        }
    }

    #[test]
    fn eta_derivative_matches_central_difference() {
        let q = orbit();
        for omega in [0.3, 1.0, 2.5] {
            let h = 1e-4;
            let cd = (eta(q, omega + h) - eta(q, omega - h)) / (2.0 * h);
            let an = eta_derivative(q, omega);
            assert!((cd - an).abs() < 1e-6 * an.abs().max(1.0), "omega {omega}: {cd} vs {an}");
        }
    }
}
