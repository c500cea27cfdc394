//! Fixed points of the period map as the forcing level k crosses the
//! minimum of f: none below it, two above.

use apdyn::flow::{fixed_point_scan, FlowOptions, Forcing, Oscillator, PoincareMap, ScanWindow, Waveform};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let window = ScanWindow { x_min: -4.0, x_max: 4.0, y_min: -1.0, y_max: 1.0, nx: 9, ny: 5 };
    for k in [-0.5, 0.5, 1.5, 2.0, 3.0] {
        let forcing = Forcing::Periodic { k, eps: 0.01, omega: 10.0, p0: Waveform::Sin, phase: 0.0 };
        let map = PoincareMap::new(Oscillator::new(Nonlinearity::sqrt1p(), forcing, 0.0)?, FlowOptions::default())?;
        let found = fixed_point_scan(&map, &window);
        let pts: Vec<String> = found.iter().map(|p| format!("({:.4}, {:.4})", p.point.x, p.point.y)).collect();
        println!("k = {k:>4}: {} fixed points {}", found.len(), pts.join(" "));
    }
    Ok(())
}
