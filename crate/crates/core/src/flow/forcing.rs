use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::quad;

/// A 2 pi-periodic forcing profile p0(theta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Sin,
    Cos,
    Zero,
    Constant(f64),
    /// sum_n cos[n-1] cos(n theta) + sin[n-1] sin(n theta), n >= 1.
    Fourier {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl Waveform {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Self::Sin),
            "cos" => Some(Self::Cos),
            "zero" => Some(Self::Zero),
            _ => None,
        }
    }

    fn fourier_sum(cos: &[f64], sin: &[f64], theta: f64, order: u32) -> f64 {
        let n_max = cos.len().max(sin.len());
        let mut acc = 0.0;
        for n in 1..=n_max {
            let nf = n as f64;
            let a = cos.get(n - 1).copied().unwrap_or(0.0);
            let b = sin.get(n - 1).copied().unwrap_or(0.0);
            let (c, s) = ((nf * theta).cos(), (nf * theta).sin());
            let scale = nf.powi(order as i32);
            acc += scale
                * match order % 4 {
                    0 => a * c + b * s,
                    1 => -a * s + b * c,
                    2 => -a * c - b * s,
                    _ => a * s - b * c,
                };
        }
        acc
    }

    pub fn value(&self, theta: f64) -> f64 {
        match self {
            Self::Sin => theta.sin(),
            Self::Cos => theta.cos(),
            Self::Zero => 0.0,
            Self::Constant(c) => *c,
            Self::Fourier { cos, sin } => Self::fourier_sum(cos, sin, theta, 0),
        }
    }

    pub fn d1(&self, theta: f64) -> f64 {
        match self {
            Self::Sin => theta.cos(),
            Self::Cos => -theta.sin(),
            Self::Zero | Self::Constant(_) => 0.0,
            Self::Fourier { cos, sin } => Self::fourier_sum(cos, sin, theta, 1),
        }
    }

    pub fn d2(&self, theta: f64) -> f64 {
        match self {
            Self::Sin => -theta.sin(),
            Self::Cos => -theta.cos(),
            Self::Zero | Self::Constant(_) => 0.0,
            Self::Fourier { cos, sin } => Self::fourier_sum(cos, sin, theta, 2),
        }
    }

    /// Mean over one period, by quadrature.
    pub fn mean(&self) -> f64 {
        quad::integrate(|t| self.value(t), 0.0, 2.0 * PI, 1e-14, 1e-12, 200).value / (2.0 * PI)
    }

    fn sampled_max(&self, g: impl Fn(f64) -> f64) -> f64 {
        const N: usize = 8192;
        (0..N)
            .map(|i| g(2.0 * PI * i as f64 / N as f64).abs())
            .fold(0.0, f64::max)
    }

    /// sup |p0|, exact for the named profiles and sampled otherwise.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Sin | Self::Cos => 1.0,
            Self::Zero => 0.0,
            Self::Constant(c) => c.abs(),
            Self::Fourier { .. } => self.sampled_max(|t| self.value(t)),
        }
    }

    /// sup |p0'|.
    pub fn d1_sup_norm(&self) -> f64 {
        match self {
            Self::Sin | Self::Cos => 1.0,
            Self::Zero | Self::Constant(_) => 0.0,
            Self::Fourier { .. } => self.sampled_max(|t| self.d1(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Zero | Self::Constant(_) => true,
            Self::Sin | Self::Cos => false,
            Self::Fourier { cos, sin } => cos.iter().chain(sin.iter()).all(|c| *c == 0.0),
        }
    }
}

/// The forcing p(t) of u'' + c u' + f(u) = p(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum Forcing {
    Constant {
        k: f64,
    },
    /// k1 on [nT, nT + t1), k2 on [nT + t1, (n + 1)T), T = t1 + t2.
    Step {
        k1: f64,
        k2: f64,
        t1: f64,
        t2: f64,
    },
    /// k + eps p0(omega t + phase).
    Periodic {
        k: f64,
        eps: f64,
        omega: f64,
        p0: Waveform,
        #[serde(default)]
        phase: f64,
    },
}

impl Forcing {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidForcing(m));
        match self {
            Self::Constant { k } if !k.is_finite() => bad(format!("k = {k} is not finite")),
            Self::Constant { .. } => Ok(()),
            Self::Step { k1, k2, t1, t2 } => {
                if k1 == k2 {
                    return bad(format!("step levels must differ, got k1 = k2 = {k1}"));
                }
                if !(*t1 > 0.0 && *t2 > 0.0) {
                    return bad(format!("step durations must be positive, got t1 = {t1}, t2 = {t2}"));
                }
                Ok(())
            }
            Self::Periodic { omega, p0, eps, .. } => {
                if !(*omega > 0.0) {
                    return bad(format!("omega = {omega} must be positive"));
                }
                if !eps.is_finite() {
                    return bad(format!("eps = {eps} is not finite"));
                }
                let mean = p0.mean();
                if mean.abs() > 1e-10 * p0.sup_norm().max(1.0) {
                    return bad(format!("p0 must have zero mean, got {mean}"));
                }
                Ok(())
            }
        }
    }

    /// Forcing period, `None` for constant forcing.
    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Constant { .. } => None,
            Self::Step { t1, t2, .. } => Some(t1 + t2),
            Self::Periodic { omega, .. } => Some(2.0 * PI / omega),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant { k } => *k,
            Self::Step { k1, k2, t1, t2 } => {
                let period = t1 + t2;
                let tau = t - (t / period).floor() * period;
                if tau < *t1 {
                    *k1
                } else {
                    *k2
                }
            }
            Self::Periodic { k, eps, omega, p0, phase } => k + eps * p0.value(omega * t + phase),
        }
    }

    /// Next discontinuity strictly after t (forward) or strictly before t
    /// (backward). Switch instants are n T and n T + t1, evaluated with the
    /// same expression every time so repeated queries agree bitwise.
    pub fn next_switch(&self, t: f64, forward: bool) -> Option<f64> {
        let Self::Step { t1, t2, .. } = self else {
            return None;
        };
        let period = t1 + t2;
        let n = (t / period).floor();
        let mut best: Option<f64> = None;
        for dn in -1..=2 {
            let base = (n + dn as f64) * period;
            for cand in [base, base + t1] {
                let ok = if forward { cand > t } else { cand < t };
                if ok {
                    best = Some(match best {
                        None => cand,
                        Some(b) if forward => b.min(cand),
                        Some(b) => b.max(cand),
                    });
                }
            }
        }
        best
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self, Self::Periodic { .. })
    }
}
