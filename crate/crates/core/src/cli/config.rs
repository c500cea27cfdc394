//! Experiment configurations. Every block rejects unknown keys; physical
//! parameters are validated by the module that owns them and reported
//! against the key they came from.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::flow::{FlowOptions, Forcing, IcLine, ScanWindow, Waveform};
use crate::horseshoe::{Levels, PeriodicOptions, StretchOptions};
use crate::model::Nonlinearity;
use crate::timemap::TimeMapKind;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        // Unknown and missing keys sit one level below the reported path.
        let named = field_name(&message);
        let key = match (key.as_str(), named) {
            (".", Some(n)) => n.to_string(),
            (k, Some(n)) if message.starts_with("missing field") => format!("{k}.{n}"),
            (k, Some(n)) if message.starts_with("unknown field") && !k.ends_with(n) => format!("{k}.{n}"),
            (k, _) => k.to_string(),
        };
        CliError::Config { key, message }
    })
}

fn field_name(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config { key: key.to_string(), message: message.into() }
}

pub fn nonlinearity(name: &str) -> Result<Nonlinearity, CliError> {
    Nonlinearity::from_name(name).map_err(|e| invalid("f", e.to_string()))
}

fn default_flow() -> FlowOptions {
    FlowOptions::default()
}

fn flow_options(rtol: f64, atol: f64, blowup_bound: f64) -> Result<FlowOptions, CliError> {
    let positive = |key: &str, v: f64| if v > 0.0 { Ok(()) } else { Err(invalid(key, format!("must be positive, got {v}"))) };
    positive("rtol", rtol)?;
    positive("atol", atol)?;
    positive("blowup_bound", blowup_bound)?;
    Ok(FlowOptions { rtol, atol, blowup_bound, ..FlowOptions::default() })
}

fn default_rtol() -> f64 {
    default_flow().rtol
}

fn default_atol() -> f64 {
    default_flow().atol
}

fn default_blowup() -> f64 {
    default_flow().blowup_bound
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub k1: f64,
    pub k2: f64,
    /// Automatic levels when absent.
    #[serde(default)]
    pub levels: Option<Levels>,
    #[serde(default = "default_per_edge")]
    pub boundary_points_per_edge: usize,
}

fn default_per_edge() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub f: String,
    pub k: f64,
    /// Energy levels to classify.
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub regions: Option<RegionsConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeMapQuery {
    pub rho: f64,
    pub kind: TimeMapKind,
    pub r: f64,
    /// Second abscissa, generic queries only.
    #[serde(default)]
    pub x2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeMapConfig {
    pub f: String,
    pub k: f64,
    pub queries: Vec<TimeMapQuery>,
}

impl TimeMapConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        nonlinearity(&self.f)?;
        for (i, q) in self.queries.iter().enumerate() {
            if q.kind == TimeMapKind::Generic && q.x2.is_none() {
                return Err(invalid(&format!("queries[{i}].x2"), "generic time maps need x2"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        if !(self.min <= self.max) || self.count == 0 {
            return Err(invalid(key, format!("need min <= max and count >= 1, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MelnikovConfig {
    pub f: String,
    pub k: f64,
    pub p0: Waveform,
    pub omega: f64,
    #[serde(default)]
    pub c0: f64,
    /// Phases sampled on one period 2 pi / omega.
    #[serde(default = "default_alpha_count")]
    pub alpha_count: usize,
    #[serde(default = "default_omega_grid")]
    pub omega_grid: Grid,
    #[serde(default = "default_xi_terms")]
    pub xi_terms: usize,
}

fn default_alpha_count() -> usize {
    256
}

fn default_omega_grid() -> Grid {
    Grid { min: 0.1, max: 10.0, count: 100 }
}

fn default_xi_terms() -> usize {
    10
}

impl MelnikovConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let f = nonlinearity(&self.f)?;
        if f.smoothness() == crate::model::Smoothness::C0Lipschitz {
            return Err(invalid("f", format!("`{}` is not C2", self.f)));
        }
        if !(self.k > 0.0) {
            return Err(invalid("k", format!("needs k > 0, got {}", self.k)));
        }
        if !(self.omega > 0.0) {
            return Err(invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if self.alpha_count < 2 {
            return Err(invalid("alpha_count", "need at least 2 phases"));
        }
        self.omega_grid.validate("omega_grid")?;
        if !(self.omega_grid.min > 0.0) {
            return Err(invalid("omega_grid.min", "frequencies must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub f: String,
    pub forcing: Forcing,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_blowup")]
    pub blowup_bound: f64,
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
    pub ic: IcLine,
}

fn default_n_iter() -> usize {
    300
}

impl ScatterConfig {
    pub fn flow(&self) -> Result<FlowOptions, CliError> {
        flow_options(self.rtol, self.atol, self.blowup_bound)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        nonlinearity(&self.f)?;
        self.forcing.validate().map_err(|e| invalid("forcing", e.to_string()))?;
        if self.forcing.period().is_none() {
            return Err(invalid("forcing", "the Poincare map needs periodic or step forcing"));
        }
        if !(self.c >= 0.0) {
            return Err(invalid("c", format!("damping must be non-negative, got {}", self.c)));
        }
        if self.ic.count == 0 {
            return Err(invalid("ic.count", "need at least one initial condition"));
        }
        if !(self.ic.u0_min <= self.ic.u0_max) {
            return Err(invalid("ic.u0_max", "need u0_min <= u0_max"));
        }
        self.flow().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorseshoeConfig {
    pub f: String,
    pub k1: f64,
    pub k2: f64,
    /// Step durations; either both or `threshold_factor`.
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub t2: Option<f64>,
    /// t1, t2 = factor times the thresholds tau1*, tau2*.
    #[serde(default)]
    pub threshold_factor: Option<f64>,
    /// Automatic levels when absent.
    #[serde(default)]
    pub levels: Option<Levels>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub stretch: StretchOptions,
    #[serde(default)]
    pub periodic: PeriodicOptions,
    /// Words for `horseshoe periodic` when none is given on the command line.
    #[serde(default)]
    pub itineraries: Vec<Vec<usize>>,
}

fn default_m() -> usize {
    2
}

impl HorseshoeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        nonlinearity(&self.f)?;
        if !(self.k1 < self.k2) {
            return Err(invalid("k2", format!("need k1 < k2, got k1 = {} and k2 = {}", self.k1, self.k2)));
        }
        match (self.t1, self.t2, self.threshold_factor) {
            (Some(t1), Some(t2), None) => {
                if !(t1 > 0.0) {
                    return Err(invalid("t1", format!("must be positive, got {t1}")));
                }
                if !(t2 > 0.0) {
                    return Err(invalid("t2", format!("must be positive, got {t2}")));
                }
            }
            (None, None, Some(c)) => {
                if !(c > 0.0) {
                    return Err(invalid("threshold_factor", format!("must be positive, got {c}")));
                }
            }
            (_, _, Some(_)) => return Err(invalid("threshold_factor", "give either t1 and t2 or threshold_factor")),
            (None, _, None) => return Err(invalid("t1", "missing; give t1 and t2 or threshold_factor")),
            (_, None, None) => return Err(invalid("t2", "missing; give t1 and t2 or threshold_factor")),
        }
        if self.m == 0 {
            return Err(invalid("m", "need at least one winding"));
        }
        if self.stretch.paths < 2 || self.stretch.initial_nodes < 2 {
            return Err(invalid("stretch", "need at least 2 paths and 2 initial nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApScanConfig {
    pub f: String,
    /// Mean levels k of the forcing k + eps p0(omega t + phase).
    pub k: Vec<f64>,
    pub eps: f64,
    pub omega: f64,
    #[serde(default = "default_p0")]
    pub p0: Waveform,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub c: f64,
    pub window: ScanWindow,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_blowup")]
    pub blowup_bound: f64,
}

fn default_p0() -> Waveform {
    Waveform::Sin
}

impl ApScanConfig {
    pub fn forcing(&self, k: f64) -> Forcing {
        Forcing::Periodic { k, eps: self.eps, omega: self.omega, p0: self.p0.clone(), phase: self.phase }
    }

    pub fn flow(&self) -> Result<FlowOptions, CliError> {
        flow_options(self.rtol, self.atol, self.blowup_bound)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        nonlinearity(&self.f)?;
        for (i, &k) in self.k.iter().enumerate() {
            self.forcing(k).validate().map_err(|e| invalid(&format!("k[{i}]"), e.to_string()))?;
        }
        if !(self.c >= 0.0) {
            return Err(invalid("c", format!("damping must be non-negative, got {}", self.c)));
        }
        let w = &self.window;
        if !(w.x_min <= w.x_max && w.y_min <= w.y_max) || w.nx == 0 || w.ny == 0 {
            return Err(invalid("window", "need x_min <= x_max, y_min <= y_max and nx, ny >= 1"));
        }
        self.flow().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of<T: DeserializeOwned + std::fmt::Debug>(text: &str) -> String {
        match parse::<T>(text) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_offending_key() {
        let base = r#"{"f":"sqrt1p","forcing":{"variant":"constant","k":2},"ic":{"u0_min":0,"u0_max":1,"count":2,"y0":0}"#;
        assert_eq!(key_of::<ScatterConfig>(&format!("{base},\"bogus\":1}}")), "bogus");
        assert_eq!(key_of::<ScatterConfig>(&format!("{base},\"rtol\":\"x\"}}")), "rtol");
        let nested = r#"{"f":"abs","forcing":{"variant":"constant","k":2},"ic":{"u0_min":0,"u0_max":1,"count":2}}"#;
        assert_eq!(key_of::<ScatterConfig>(nested), "ic.y0");
        let extra = r#"{"f":"abs","forcing":{"variant":"constant","k":2},"ic":{"u0_min":0,"u0_max":1,"count":2,"y0":0,"z":1}}"#;
        assert_eq!(key_of::<ScatterConfig>(extra), "ic.z");
    }

    #[test]
    fn horseshoe_times_are_exclusive() {
        let c: HorseshoeConfig = parse(r#"{"f":"abs","k1":0,"k2":2,"t1":2,"threshold_factor":1.2}"#).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config { key, .. }) if key == "threshold_factor"));
        let c: HorseshoeConfig = parse(r#"{"f":"abs","k1":0,"k2":2,"t1":2}"#).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config { key, .. }) if key == "t2"));
    }

    #[test]
    fn grids_are_inclusive() {
        assert_eq!(Grid { min: 0.0, max: 1.0, count: 3 }.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid { min: 2.0, max: 5.0, count: 1 }.values(), vec![2.0]);
    }
}
