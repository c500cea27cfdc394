//! Period-map iterates of a line of initial conditions, counting the orbits
//! that stay bounded at low and high forcing amplitude.

use apdyn::flow::{scatter, FlowOptions, Forcing, IcLine, Oscillator, PoincareMap, ScatterFlag, Waveform};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ic = IcLine { u0_min: -4.0, u0_max: 6.0, count: 100, y0: 0.0 };
    for (eps, omega) in [(0.01, 10.0), (1.5, 0.1)] {
        let forcing = Forcing::Periodic { k: 2.0, eps, omega, p0: Waveform::Sin, phase: 0.0 };
        let map = PoincareMap::new(Oscillator::new(Nonlinearity::sqrt1p(), forcing, 0.0)?, FlowOptions::default())?;
        let rows = scatter(&map, &ic, 100);
        let lost = rows.iter().filter(|r| r.flag == ScatterFlag::Blowup).count();
        println!("eps {eps}, omega {omega}: {} iterates, {lost} of {} orbits unbounded", rows.len(), ic.count);
    }
    Ok(())
}
