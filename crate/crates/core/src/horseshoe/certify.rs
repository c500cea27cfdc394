use serde::{Deserialize, Serialize};

use super::{
    tau_stars, verify_stretch, GeometrySummary, HorseshoeError, Levels, RegionGeometry, Stage, StageMap, StretchCertificate,
    StretchOptions, StretchVerdict, TauStars,
};
use crate::flow::Forcing;
use crate::model::Nonlinearity;

/// Levels and durations of the two-step forcing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub k1: f64,
    pub k2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl StepSchedule {
    pub fn from_forcing(forcing: &Forcing) -> Result<Self, HorseshoeError> {
        match *forcing {
            Forcing::Step { k1, k2, t1, t2 } => Ok(Self { k1, k2, t1, t2 }),
            _ => Err(HorseshoeError::Precondition("horseshoe certification needs step forcing".into())),
        }
    }

    pub fn forcing(&self) -> Forcing {
        Forcing::Step {
            k1: self.k1,
            k2: self.k2,
            t1: self.t1,
            t2: self.t2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Granted,
    Declined,
    Inconclusive,
}

impl Verdict {
    /// Process exit status reported by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Granted => 0,
            Self::Declined => 2,
            Self::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub inequality: &'static str,
    pub time: f64,
    pub threshold: f64,
    pub holds: bool,
}

pub const TAU1_INEQUALITY: &str = "t1 > tau1* = max(tau_V(A), tau_U(B))";
pub const TAU2_INEQUALITY: &str = "t2 > tau2* = tau_O(D) + (m - 1) T_O(D)";

#[derive(Debug, Clone, Serialize)]
pub struct HorseshoeCertificate {
    pub schedule: StepSchedule,
    pub m: usize,
    pub geometry: GeometrySummary,
    pub tau_stars: TauStars,
    pub thresholds: Vec<ThresholdCheck>,
    pub psi1: Option<StretchCertificate>,
    pub psi2: Option<StretchCertificate>,
    /// Alphabet sizes (n, m): step-one sets times windings.
    pub symbols: (usize, usize),
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub claim: Option<String>,
}

/// A certificate together with the geometry it was established on.
#[derive(Debug, Clone)]
pub struct Certification {
    pub geometry: RegionGeometry,
    pub certificate: HorseshoeCertificate,
    pub options: StretchOptions,
}

impl Certification {
    pub fn is_granted(&self) -> bool {
        self.certificate.verdict == Verdict::Granted
    }

    pub fn schedule(&self) -> StepSchedule {
        self.certificate.schedule
    }

    pub fn m(&self) -> usize {
        self.certificate.m
    }
}

fn stretch_reason(cert: &StretchCertificate) -> String {
    let leg = match cert.stage {
        Stage::Psi1 => "first leg",
        Stage::Psi2 => "second leg",
    };
    let path = cert.witness.map(|i| format!(" on path {i}")).unwrap_or_default();
    match cert.verdict {
        StretchVerdict::Crossed => format!("{leg} crossed"),
        StretchVerdict::Missing => format!(
            "{leg} misses a required crossing{path}: found {} of {}",
            cert.crossing_number,
            cert.required_labels.len()
        ),
        StretchVerdict::Inconclusive => format!("{leg} refinement budget exhausted{path}"),
    }
}

/// Builds the regions, checks both switching-time thresholds and verifies
/// the stretching of each leg. `levels = None` selects the automatic levels.
pub fn certify_horseshoe(
    f: &Nonlinearity,
    schedule: StepSchedule,
    levels: Option<Levels>,
    m: usize,
    opts: &StretchOptions,
) -> Result<Certification, HorseshoeError> {
    let StepSchedule { k1, k2, t1, t2 } = schedule;
    let levels = match levels {
        Some(l) => l,
        None => RegionGeometry::auto_levels(f, k1, k2)?,
    };
    let geometry = RegionGeometry::build(f, k1, k2, levels)?;
    let ts = tau_stars(&geometry, m)?;
    let thresholds = vec![
        ThresholdCheck {
            inequality: TAU1_INEQUALITY,
            time: t1,
            threshold: ts.tau1,
            holds: t1 > ts.tau1,
        },
        ThresholdCheck {
            inequality: TAU2_INEQUALITY,
            time: t2,
            threshold: ts.tau2,
            holds: t2 > ts.tau2,
        },
    ];
    let step1 = geometry.step1_labels();
    let mut certificate = HorseshoeCertificate {
        schedule,
        m,
        geometry: geometry.summary(),
        tau_stars: ts,
        thresholds: thresholds.clone(),
        psi1: None,
        psi2: None,
        symbols: (step1.len(), m),
        verdict: Verdict::Declined,
        reason: None,
        claim: None,
    };
    if let Some(bad) = thresholds.iter().find(|c| !c.holds) {
        certificate.reason = Some(format!(
            "threshold unmet: {} fails with {} <= {}",
            bad.inequality, bad.time, bad.threshold
        ));
        return Ok(Certification { geometry, certificate, options: *opts });
    }
    let psi1 = verify_stretch(&StageMap::new(&geometry, Stage::Psi1, t1, opts.flow), &step1, opts);
    let windings: Vec<usize> = (0..m).collect();
    let psi2 = verify_stretch(&StageMap::new(&geometry, Stage::Psi2, t2, opts.flow), &windings, opts);
    let (verdict, reason) = match (psi1.verdict, psi2.verdict) {
        (StretchVerdict::Crossed, StretchVerdict::Crossed) => (Verdict::Granted, None),
        (StretchVerdict::Missing, _) => (Verdict::Declined, Some(stretch_reason(&psi1))),
        (_, StretchVerdict::Missing) => (Verdict::Declined, Some(stretch_reason(&psi2))),
        (StretchVerdict::Inconclusive, _) => (Verdict::Inconclusive, Some(stretch_reason(&psi1))),
        (_, StretchVerdict::Inconclusive) => (Verdict::Inconclusive, Some(stretch_reason(&psi2))),
    };
    certificate.verdict = verdict;
    certificate.reason = reason;
    if verdict == Verdict::Granted {
        certificate.claim = Some(format!(
            "chaotic dynamics on {}x{} symbols (numerical evidence)",
            step1.len(),
            m
        ));
    }
    certificate.psi1 = Some(psi1);
    certificate.psi2 = Some(psi2);
    Ok(Certification { geometry, certificate, options: *opts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_second_step_is_declined_without_flowing() {
        let schedule = StepSchedule { k1: 0.0, k2: 2.0, t1: 2.0, t2: 3.0 };
        let c = certify_horseshoe(&Nonlinearity::abs(), schedule, Some(Levels::abs_example(0.1)), 2, &StretchOptions::default()).unwrap();
        assert_eq!(c.certificate.verdict, Verdict::Declined);
        assert!(c.certificate.reason.as_deref().unwrap().contains(TAU2_INEQUALITY));
        assert!(c.certificate.psi1.is_none());
        assert_eq!(Verdict::Declined.exit_code(), 2);
    }

    #[test]
    fn schedule_requires_step_forcing() {
        assert!(StepSchedule::from_forcing(&Forcing::Constant { k: 1.0 }).is_err());
        let s = StepSchedule::from_forcing(&Forcing::Step { k1: 0.0, k2: 2.0, t1: 2.0, t2: 13.0 }).unwrap();
        assert_eq!(s.forcing(), Forcing::Step { k1: 0.0, k2: 2.0, t1: 2.0, t2: 13.0 });
    }
}
