use serde::Serialize;

use super::{EnergyFrame, ModelError};

/// Shape of the level set {E_k = rho}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelKind {
    /// rho = Phi_k(x_u): the homoclinic loop and its stable/unstable branches.
    SaddleLoop,
    /// Phi_k(x_s) < rho < Phi_k(x_u): a closed orbit plus an unbounded left branch.
    ThreeRoots,
    /// rho = Phi_k(x_s): the center itself plus the left branch.
    CenterTangent,
    /// rho > Phi_k(x_u): a single unbounded curve around both equilibria.
    OuterU,
    /// rho < Phi_k(x_s): a single unbounded curve left of the saddle.
    InnerV,
    /// k = 0: one root of the monotone potential.
    DegenerateSingle,
}

/// Names of the abscissas where a level set meets the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootName {
    /// Leftmost root x_*(rho) on (-inf, x_u].
    LowerStar,
    /// Left root x_-(rho) of the closed orbit, on [x_u, x_s].
    Minus,
    /// Right root x_+(rho) of the closed orbit, on [x_s, x_h].
    Plus,
    /// Root x^*(rho) of an outer level, right of x_h.
    UpperStar,
    Saddle,
    Center,
    Homoclinic,
    /// The unique root for k = 0.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NamedRoot {
    pub name: RootName,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelClassification {
    pub rho: f64,
    pub kind: LevelKind,
    pub roots: Vec<NamedRoot>,
}

impl LevelClassification {
    pub fn root(&self, name: RootName) -> Option<f64> {
        self.roots.iter().find(|r| r.name == name).map(|r| r.x)
    }
}

fn named(name: RootName, x: f64) -> NamedRoot {
    NamedRoot { name, x }
}

impl EnergyFrame {
    /// Classifies the level set E_k = rho and locates its x-axis roots by
    /// bracketing on the monotone branches of Phi_k.
    pub fn classify_level(&self, rho: f64) -> Result<LevelClassification, ModelError> {
        let tol = self.tolerance();
        let (kind, roots) = if self.k() == 0.0 {
            let x = if rho.abs() <= tol {
                0.0
            } else if rho < 0.0 {
                self.root_left(rho)?
            } else {
                self.root_right(rho)?
            };
            (LevelKind::DegenerateSingle, vec![named(RootName::Single, x)])
        } else {
            let (pu, ps) = (self.phi_at_xu(), self.phi_at_xs());
            if (rho - pu).abs() <= tol {
                let x_h = self.x_h().expect("k > 0");
                (
                    LevelKind::SaddleLoop,
                    vec![named(RootName::Saddle, self.x_u()), named(RootName::Homoclinic, x_h)],
                )
            } else if rho > pu {
                (LevelKind::OuterU, vec![named(RootName::UpperStar, self.root_right(rho)?)])
            } else if (rho - ps).abs() <= tol {
                (
                    LevelKind::CenterTangent,
                    vec![named(RootName::LowerStar, self.root_left(rho)?), named(RootName::Center, self.x_s())],
                )
            } else if rho > ps {
                (
                    LevelKind::ThreeRoots,
                    vec![
                        named(RootName::LowerStar, self.root_left(rho)?),
                        named(RootName::Minus, self.root_middle(rho)?),
                        named(RootName::Plus, self.root_right(rho)?),
                    ],
                )
            } else {
                (LevelKind::InnerV, vec![named(RootName::LowerStar, self.root_left(rho)?)])
            }
        };
        Ok(LevelClassification { rho, kind, roots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Nonlinearity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn abs_examples() {
        let z = EnergyFrame::new(Nonlinearity::abs(), 0.0).unwrap();
        let c = z.classify_level(0.0).unwrap();
        assert_eq!(c.kind, LevelKind::DegenerateSingle);
        assert_eq!(c.root(RootName::Single), Some(0.0));

        let fr = EnergyFrame::new(Nonlinearity::abs(), 2.0).unwrap();
        let c = fr.classify_level(0.0).unwrap();
        assert_eq!(c.kind, LevelKind::ThreeRoots);
        assert_abs_diff_eq!(c.root(RootName::LowerStar).unwrap(), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.root(RootName::Minus).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.root(RootName::Plus).unwrap(), 4.0, epsilon = 1e-12);

        let c = fr.classify_level(2.0).unwrap();
        assert_eq!(c.kind, LevelKind::SaddleLoop);
        assert_eq!(c.root(RootName::Saddle), Some(-2.0));
        assert_abs_diff_eq!(c.root(RootName::Homoclinic).unwrap(), 2.0 + 8f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn outer_and_inner_levels() {
        let fr = EnergyFrame::new(Nonlinearity::sqrt1p(), 2.0).unwrap();
        let up = fr.classify_level(fr.phi_at_xu() + 1.0).unwrap();
        assert_eq!(up.kind, LevelKind::OuterU);
        assert!(up.root(RootName::UpperStar).unwrap() > fr.x_h().unwrap());
        let lo = fr.classify_level(fr.phi_at_xs() - 1.0).unwrap();
        assert_eq!(lo.kind, LevelKind::InnerV);
        assert!(lo.root(RootName::LowerStar).unwrap() < fr.x_u());
        let ct = fr.classify_level(fr.phi_at_xs()).unwrap();
        assert_eq!(ct.kind, LevelKind::CenterTangent);
    }

    proptest! {
        #[test]
        fn three_root_ordering(k in 0.01f64..10.0, t in 0.001f64..0.999) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let fr = EnergyFrame::new(f, k).unwrap();
                let rho = fr.phi_at_xs() + t * (fr.phi_at_xu() - fr.phi_at_xs());
                let c = fr.classify_level(rho).unwrap();
                prop_assert_eq!(c.kind, LevelKind::ThreeRoots);
                let xs = c.root(RootName::LowerStar).unwrap();
                let xm = c.root(RootName::Minus).unwrap();
                let xp = c.root(RootName::Plus).unwrap();
                prop_assert!(xs < fr.x_u() && fr.x_u() < xm && xm < fr.x_s() && fr.x_s() < xp);
                for r in &c.roots {
                    prop_assert!((fr.phi(r.x) - rho).abs() < 1e-12 * (1.0 + rho.abs()).max(1.0) * 10.0);
                }
            }
        }

        #[test]
        fn single_root_outside_band(k in 0.01f64..10.0, d in 0.01f64..50.0) {
            for f in [Nonlinearity::abs(), Nonlinearity::sqrt1p()] {
                let fr = EnergyFrame::new(f, k).unwrap();
                let up = fr.classify_level(fr.phi_at_xu() + d).unwrap();
                prop_assert_eq!(up.roots.len(), 1);
                prop_assert!(up.roots[0].x > fr.x_h().unwrap());
                let lo = fr.classify_level(fr.phi_at_xs() - d).unwrap();
                prop_assert_eq!(lo.roots.len(), 1);
                prop_assert!(lo.roots[0].x < fr.x_u());
            }
        }
    }
}
