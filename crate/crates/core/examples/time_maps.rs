//! Travel times along energy levels: the isochronous center of |u| and the
//! period growth of sqrt(1 + u^2) as levels approach the homoclinic loop.

use apdyn::model::{EnergyFrame, Nonlinearity, RootName};
use apdyn::timemap::{period_o, tau_o, tau_u};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let free = EnergyFrame::new(Nonlinearity::abs(), 0.0)?;
    println!("|u|, k = 0: tau_U(8; 2 sqrt 2) = {:.15}", tau_u(&free, 8.0, 8f64.sqrt())?.tau);

    let abs = EnergyFrame::new(Nonlinearity::abs(), 2.0)?;
    for rho in [-1.5, -1.0, -0.5] {
        println!("|u|, k = 2: period at rho {rho:>5} = {:.12}", period_o(&abs, rho)?.tau);
    }

    let sq = EnergyFrame::new(Nonlinearity::sqrt1p(), 2.0)?;
    let (lo, hi) = (sq.phi_at_xs(), sq.phi_at_xu());
    for s in [0.1, 0.5, 0.9, 0.99, 0.9999] {
        let rho = lo + s * (hi - lo);
        let xp = sq.classify_level(rho)?.root(RootName::Plus).expect("closed level");
        let half = tau_o(&sq, rho, xp)?;
        let full = period_o(&sq, rho)?;
        println!("sqrt1p, k = 2: rho {rho:>8.4} half {:.6} period {:.6} (err {:.1e})", half.tau, full.tau, full.err);
    }
    Ok(())
}
