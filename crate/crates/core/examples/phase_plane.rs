//! Equilibria, the homoclinic loop and the shape of energy levels for
//! u'' + f(u) = k.

use apdyn::model::{equilibria, homoclinic_intercept, EnergyFrame, Nonlinearity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
        let k = 2.0;
        let (xu, xs) = equilibria(&f, k)?;
        let xh = homoclinic_intercept(&f, k)?;
        println!("{} k = {k}: saddle {xu:.6}, center {xs:.6}, loop reaches {xh:.6}", f.name());

        let fr = EnergyFrame::new(f, k)?;
        let (lo, hi) = (fr.phi_at_xs(), fr.phi_at_xu());
        for rho in [lo - 1.0, lo, 0.5 * (lo + hi), hi, hi + 1.0] {
            let c = fr.classify_level(rho)?;
            let roots: Vec<String> = c.roots.iter().map(|r| format!("{:?} {:.4}", r.name, r.x)).collect();
            println!("  rho {rho:>8.4}: {:?} [{}]", c.kind, roots.join(", "));
        }
    }
    Ok(())
}
