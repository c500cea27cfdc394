//! Frequency below which the Melnikov function of a slowly varying forcing
//! has simple zeros, with the witnesses of the bound.

use apdyn::flow::Waveform;
use apdyn::melnikov::{critical_points, omega_threshold, HomoclinicOrbit};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 2.0)?;
    for c in critical_points(&Waveform::Sin, 256) {
        println!("critical point of sin at theta = {:.6}, p0'' = {:+.3}", c.theta, c.second_derivative);
    }
    let t = omega_threshold(&q, &Waveform::Sin)?;
    println!("Omega_0 = {:.6}", t.omega0);
    for w in [&t.upper, &t.lower] {
        println!("  side {:+}: s = {:.4}, delta = {:.4}, r = {:.4}, Omega = {:.6}", w.side, w.s, w.delta, w.r, w.omega);
    }
    println!("{}", t.evidence);
    Ok(())
}
