//! Stretching-along-paths certificate for |u| with a forcing switching
//! between k = 0 and k = 2, then periodic orbits with prescribed symbols.

use apdyn::horseshoe::{certify_horseshoe, find_periodic_orbit, Itinerary, Levels, PeriodicOptions, StepSchedule, StretchOptions};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schedule = StepSchedule { k1: 0.0, k2: 2.0, t1: 2.0, t2: 13.0 };
    let c = certify_horseshoe(&Nonlinearity::abs(), schedule, Some(Levels::abs_example(0.1)), 2, &StretchOptions::default())?;
    let ce = &c.certificate;
    println!("{:?}: symbols {:?}, tau* = ({:.4}, {:.4})", ce.verdict, ce.symbols, ce.tau_stars.tau1, ce.tau_stars.tau2);
    for leg in [&ce.psi1, &ce.psi2].into_iter().flatten() {
        println!("  {:?}: crossing number {}, clearance {:.2e}", leg.stage, leg.crossing_number, leg.min_clearance);
    }
    if !c.is_granted() {
        return Ok(());
    }
    for word in [vec![0], vec![1], vec![0, 1]] {
        let o = find_periodic_orbit(&c, &Itinerary::periodic(word.clone()), &PeriodicOptions::default())?;
        println!("  {word:?}: z0 = ({:.10}, {:.10}), residual {:.1e}", o.point.x, o.point.y, o.verified_residual);
    }
    Ok(())
}
