//! Melnikov function of the homoclinic loop under p0 = sin, its simple
//! zeros, and the cosine transform eta across frequencies.

use std::f64::consts::PI;

use apdyn::flow::Waveform;
use apdyn::melnikov::{delta, detect_zeros, eta, total_excursion, HomoclinicOrbit};
use apdyn::model::Nonlinearity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = HomoclinicOrbit::new(Nonlinearity::sqrt1p(), 2.0)?;
    println!("lambda = {:.6}, int q~ = {:.6}", q.lambda(), total_excursion(&q));

    let omega = 1.0;
    let period = 2.0 * PI / omega;
    let amp = 2.0 * omega * eta(&q, omega);
    let report = detect_zeros(|a| delta(&q, &Waveform::Sin, omega, a, 0.0).map(|d| d.value).unwrap_or(f64::NAN), period, 128, amp, 1e-9);
    for z in &report.simple_zeros {
        println!("simple zero at omega alpha = {:.6} pi, slope sign {}", omega * z.alpha / PI, z.slope_sign);
    }

    // eta is not of one sign: it changes sign between omega = 2 and 3.
    for w in [0.1, 0.5, 1.0, 2.0, 2.5, 3.0, 4.0, 5.0] {
        println!("eta({w:>3}) = {:>13.6e}", eta(&q, w));
    }
    Ok(())
}
