use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use super::config::{
    self, AnalyzeConfig, ApScanConfig, HorseshoeConfig, MelnikovConfig, ScatterConfig, TimeMapConfig,
};
use super::output::{emit, json, Cell, Csv};
use super::CliError;
use crate::flow::{fixed_point_scan, scatter, Oscillator, PoincareMap};
use crate::horseshoe::{
    certify_horseshoe, find_periodic_orbit, tau_stars, Certification, HorseshoeCertificate, Itinerary, PeriodicOrbit,
    RectangleId, RegionGeometry, StepSchedule,
};
use crate::melnikov::{
    critical_points, delta_curve, detect_zeros, eta, omega_threshold, xi_terms, CriticalPoint, HomoclinicOrbit,
    OmegaThreshold, ZeroReport,
};
use crate::model::{EnergyFrame, FrameSummary, LevelClassification};
use crate::point::PhasePoint;
use crate::timemap::{self, TimeMapError, TimeMapKind};

fn run_err(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Run(format!("{context}: {e}"))
}

#[derive(Serialize)]
struct RegionsReport {
    geometry: crate::horseshoe::GeometrySummary,
    boundary_m: Vec<PhasePoint>,
    boundary_n: Vec<PhasePoint>,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    config: &'a AnalyzeConfig,
    frame: FrameSummary,
    levels: Vec<LevelClassification>,
    regions: Option<RegionsReport>,
}

pub fn analyze(cfg: &AnalyzeConfig, out: Option<&Path>) -> Result<i32, CliError> {
    let f = config::nonlinearity(&cfg.f)?;
    let frame = EnergyFrame::new(f.clone(), cfg.k).map_err(|e| CliError::Config { key: "k".into(), message: e.to_string() })?;
    let levels = cfg
        .rho
        .iter()
        .enumerate()
        .map(|(i, &rho)| {
            frame.classify_level(rho).map_err(|e| CliError::Config { key: format!("rho[{i}]"), message: e.to_string() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let regions = match &cfg.regions {
        None => None,
        Some(r) => {
            let levels = match r.levels {
                Some(l) => l,
                None => RegionGeometry::auto_levels(&f, r.k1, r.k2).map_err(|e| region_error(&e))?,
            };
            let g = RegionGeometry::build(&f, r.k1, r.k2, levels).map_err(|e| region_error(&e))?;
            Some(RegionsReport {
                geometry: g.summary(),
                boundary_m: g.boundary(RectangleId::M, r.boundary_points_per_edge),
                boundary_n: g.boundary(RectangleId::N, r.boundary_points_per_edge),
            })
        }
    };
    let report = AnalyzeReport { config: cfg, frame: frame.summary(), levels, regions };
    emit(out, &json(&report)?)?;
    Ok(0)
}

fn region_error(e: &crate::horseshoe::HorseshoeError) -> CliError {
    CliError::Config { key: "regions".into(), message: e.to_string() }
}

fn kind_name(kind: TimeMapKind) -> &'static str {
    match kind {
        TimeMapKind::Generic => "Generic",
        TimeMapKind::O => "O",
        TimeMapKind::V => "V",
        TimeMapKind::U => "U",
    }
}

pub fn timemap(cfg: &TimeMapConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.validate()?;
    let frame = EnergyFrame::new(config::nonlinearity(&cfg.f)?, cfg.k)
        .map_err(|e| CliError::Config { key: "k".into(), message: e.to_string() })?;
    let mut csv = Csv::new(cfg, &["rho", "kind", "r", "tau", "err_estimate"])?;
    for (i, q) in cfg.queries.iter().enumerate() {
        let (tau, err) = match timemap::evaluate(&frame, q.kind, q.rho, q.r, q.x2) {
            Ok(t) => (t.tau, t.err),
            // A saddle endpoint takes infinite time.
            Err(TimeMapError::Divergent { .. }) => (f64::INFINITY, f64::NAN),
            Err(e) => return Err(CliError::Config { key: format!("queries[{i}]"), message: e.to_string() }),
        };
        csv.row(&[Cell::F(q.rho), Cell::S(kind_name(q.kind)), Cell::F(q.r), Cell::F(tau), Cell::F(err)]);
    }
    emit(out, &csv.into_string())?;
    Ok(0)
}

#[derive(Serialize)]
struct MelnikovReport<'a> {
    config: &'a MelnikovConfig,
    lambda: f64,
    x_h: f64,
    zeros: ZeroReport,
    xi: Vec<f64>,
    slow_forcing: SlowForcing,
}

#[derive(Serialize)]
struct SlowForcing {
    critical_points: Vec<CriticalPoint>,
    threshold: Option<OmegaThreshold>,
    note: Option<String>,
    evidence: Vec<String>,
}

/// Writes delta.csv, eta.csv and report.json into `out_dir`.
pub fn melnikov(cfg: &MelnikovConfig, out_dir: &Path) -> Result<i32, CliError> {
    cfg.validate()?;
    let f = config::nonlinearity(&cfg.f)?;
    let q = HomoclinicOrbit::new(f, cfg.k).map_err(|e| run_err("homoclinic orbit", e))?;
    let period = 2.0 * PI / cfg.omega;
    let alphas: Vec<f64> = (0..cfg.alpha_count).map(|i| period * i as f64 / cfg.alpha_count as f64).collect();
    let curve = delta_curve(&q, &cfg.p0, cfg.omega, &alphas, cfg.c0).map_err(|e| CliError::Config {
        key: "p0".into(),
        message: e.to_string(),
    })?;
    let mut dcsv = Csv::new(cfg, &["alpha", "delta", "tail_bound"])?;
    for d in &curve {
        dcsv.row(&[Cell::F(d.alpha), Cell::F(d.value), Cell::F(d.tail_bound)]);
    }
    let omegas = cfg.omega_grid.values();
    let etas: Vec<f64> = {
        use rayon::prelude::*;
        omegas.par_iter().map(|&w| eta(&q, w)).collect()
    };
    let mut ecsv = Csv::new(cfg, &["omega", "eta"])?;
    for (w, e) in omegas.iter().zip(&etas) {
        ecsv.row(&[Cell::F(*w), Cell::F(*e)]);
    }
    let scale = curve.iter().map(|d| d.tail_bound).fold(cfg.p0.sup_norm().max(1.0), f64::max);
    let lookup = |a: f64| {
        crate::melnikov::delta(&q, &cfg.p0, cfg.omega, a, cfg.c0).map(|d| d.value).unwrap_or(f64::NAN)
    };
    let zeros = detect_zeros(lookup, period, cfg.alpha_count, scale, 1e-12);
    let crit = critical_points(&cfg.p0, 4096);
    let (threshold, note) = match omega_threshold(&q, &cfg.p0) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut evidence = Vec::new();
    if !crit.is_empty() {
        evidence.push(crate::melnikov::SLOW_FORCING_EVIDENCE.to_string());
    }
    let report = MelnikovReport {
        config: cfg,
        lambda: q.lambda(),
        x_h: q.x_h(),
        zeros,
        xi: xi_terms(&q, cfg.omega, cfg.xi_terms),
        slow_forcing: SlowForcing { critical_points: crit, threshold, note, evidence },
    };
    emit(Some(&out_dir.join("delta.csv")), &dcsv.into_string())?;
    emit(Some(&out_dir.join("eta.csv")), &ecsv.into_string())?;
    emit(Some(&out_dir.join("report.json")), &json(&report)?)?;
    Ok(0)
}

pub fn scatter_cmd(cfg: &ScatterConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.validate()?;
    let osc = Oscillator::new(config::nonlinearity(&cfg.f)?, cfg.forcing.clone(), cfg.c)
        .map_err(|e| CliError::Config { key: "forcing".into(), message: e.to_string() })?;
    let map = PoincareMap::new(osc, cfg.flow()?).map_err(|e| CliError::Config { key: "forcing".into(), message: e.to_string() })?;
    let rows = scatter(&map, &cfg.ic, cfg.n_iter);
    let mut csv = Csv::new(cfg, &["ic_index", "iter", "x", "y", "flag"])?;
    for r in &rows {
        csv.row(&[Cell::U(r.ic_index), Cell::U(r.iter), Cell::F(r.x), Cell::F(r.y), Cell::S(r.flag.as_str())]);
    }
    emit(out, &csv.into_string())?;
    Ok(0)
}

/// The certification requested by a horseshoe config, with the schedule it
/// resolved to.
pub fn certification(cfg: &HorseshoeConfig) -> Result<Certification, CliError> {
    cfg.validate()?;
    let f = config::nonlinearity(&cfg.f)?;
    let schedule = match (cfg.t1, cfg.t2, cfg.threshold_factor) {
        (Some(t1), Some(t2), _) => StepSchedule { k1: cfg.k1, k2: cfg.k2, t1, t2 },
        (_, _, Some(c)) => {
            let levels = match cfg.levels {
                Some(l) => l,
                None => RegionGeometry::auto_levels(&f, cfg.k1, cfg.k2).map_err(|e| levels_error(&e))?,
            };
            let g = RegionGeometry::build(&f, cfg.k1, cfg.k2, levels).map_err(|e| levels_error(&e))?;
            let ts = tau_stars(&g, cfg.m).map_err(|e| run_err("thresholds", e))?;
            StepSchedule { k1: cfg.k1, k2: cfg.k2, t1: c * ts.tau1, t2: c * ts.tau2 }
        }
        _ => unreachable!("validated above"),
    };
    certify_horseshoe(&f, schedule, cfg.levels, cfg.m, &cfg.stretch).map_err(|e| levels_error(&e))
}

fn levels_error(e: &crate::horseshoe::HorseshoeError) -> CliError {
    match e {
        crate::horseshoe::HorseshoeError::Constraint { .. } => {
            CliError::Config { key: "levels".into(), message: e.to_string() }
        }
        _ => run_err("horseshoe", e),
    }
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    config: &'a HorseshoeConfig,
    certificate: &'a HorseshoeCertificate,
}

pub fn horseshoe_certify(cfg: &HorseshoeConfig, out: Option<&Path>) -> Result<i32, CliError> {
    let c = certification(cfg)?;
    emit(out, &json(&CertifyReport { config: cfg, certificate: &c.certificate })?)?;
    Ok(c.certificate.verdict.exit_code())
}

#[derive(Serialize)]
struct PeriodicEntry {
    itinerary: Vec<usize>,
    orbit: Option<PeriodicOrbit>,
    error: Option<String>,
}

#[derive(Serialize)]
struct PeriodicReport<'a> {
    config: &'a HorseshoeConfig,
    certificate: &'a HorseshoeCertificate,
    orbits: &'a [PeriodicEntry],
}

/// Exit 0 when every word is realized, 3 when some search came back empty,
/// and the certificate's own code when it was not granted.
pub fn horseshoe_periodic(cfg: &HorseshoeConfig, words: Option<Vec<Vec<usize>>>, out: Option<&Path>) -> Result<i32, CliError> {
    let words = words.unwrap_or_else(|| cfg.itineraries.clone());
    if words.is_empty() {
        return Err(CliError::Config { key: "itineraries".into(), message: "no itinerary given".into() });
    }
    let c = certification(cfg)?;
    let size = c.certificate.symbols.0 * c.certificate.symbols.1;
    for (i, w) in words.iter().enumerate() {
        if w.is_empty() {
            return Err(CliError::Config { key: format!("itineraries[{i}]"), message: "empty word".into() });
        }
        if let Some(&s) = w.iter().find(|&&s| s >= size) {
            return Err(CliError::Config {
                key: format!("itineraries[{i}]"),
                message: format!("symbol {s} is outside the alphabet of {size} symbols"),
            });
        }
    }
    let mut orbits = Vec::new();
    if c.is_granted() {
        for w in &words {
            let (orbit, error) = match find_periodic_orbit(&c, &Itinerary::periodic(w.clone()), &cfg.periodic) {
                Ok(o) => (Some(o), None),
                Err(e) => (None, Some(e.to_string())),
            };
            orbits.push(PeriodicEntry { itinerary: w.clone(), orbit, error });
        }
    }
    emit(out, &json(&PeriodicReport { config: cfg, certificate: &c.certificate, orbits: &orbits })?)?;
    if !c.is_granted() {
        return Ok(c.certificate.verdict.exit_code());
    }
    Ok(if orbits.iter().all(|o| o.orbit.is_some()) { 0 } else { 3 })
}

pub fn ap_scan(cfg: &ApScanConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.validate()?;
    let f = config::nonlinearity(&cfg.f)?;
    let flow = cfg.flow()?;
    let mut csv = Csv::new(cfg, &["k", "fixed_points", "max_residual", "points"])?;
    for (i, &k) in cfg.k.iter().enumerate() {
        let osc = Oscillator::new(f.clone(), cfg.forcing(k), cfg.c)
            .map_err(|e| CliError::Config { key: format!("k[{i}]"), message: e.to_string() })?;
        let map = PoincareMap::new(osc, flow).map_err(|e| CliError::Config { key: format!("k[{i}]"), message: e.to_string() })?;
        let found = fixed_point_scan(&map, &cfg.window);
        let max_res = found.iter().map(|p| p.residual).fold(0.0, f64::max);
        let points = found
            .iter()
            .map(|p| format!("{} {}", super::output::float(p.point.x), super::output::float(p.point.y)))
            .collect::<Vec<_>>()
            .join(";");
        csv.row(&[Cell::F(k), Cell::U(found.len()), Cell::F(max_res), Cell::S(&points)]);
    }
    emit(out, &csv.into_string())?;
    Ok(0)
}
