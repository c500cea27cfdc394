//! Horseshoe certificate for sqrt(1 + u^2) with automatically chosen levels
//! and step durations a fixed factor above the thresholds.

use apdyn::horseshoe::{certify_horseshoe, tau_stars, RegionGeometry, StepSchedule, StretchOptions};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = Nonlinearity::sqrt1p();
    let (k1, k2, m) = (2.0, 4.0, 2);
    let levels = RegionGeometry::auto_levels(&f, k1, k2)?;
    let g = RegionGeometry::build(&f, k1, k2, levels)?;
    let ts = tau_stars(&g, m)?;
    println!("levels {levels:?}, tau* = ({:.4}, {:.4})", ts.tau1, ts.tau2);
    for factor in [0.9, 1.2] {
        let schedule = StepSchedule { k1, k2, t1: factor * ts.tau1, t2: factor * ts.tau2 };
        let c = certify_horseshoe(&f, schedule, None, m, &StretchOptions::default())?;
        let ce = &c.certificate;
        println!("factor {factor}: {:?}, symbols {:?}", ce.verdict, ce.symbols);
        if let Some(r) = &ce.reason {
            println!("  {r}");
        }
    }
    Ok(())
}
