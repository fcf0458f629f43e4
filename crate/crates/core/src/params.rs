use crate::error::{Error, Result};

/// Physical constants of the three-fluid configuration.
///
/// Fluid 1 is on top, fluid 3 at the bottom; `c_inf` is the far-field
/// separation of the interfaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    pub rho: [f64; 3],
    pub mu: [f64; 3],
    pub permeability: f64,
    pub gravity: f64,
    pub c_inf: f64,
}

impl FluidParams {
    /// Validated constructor; requires `rho3 > rho2 > rho1`.
    pub fn new(rho: [f64; 3], mu: [f64; 3], permeability: f64, gravity: f64, c_inf: f64) -> Result<Self> {
        let p = Self::allowing_unstable(rho, mu, permeability, gravity, c_inf)?;
        if !(rho[2] > rho[1] && rho[1] > rho[0]) {
            return Err(Error::UnstableStratification {
                theta1: p.theta1(),
                theta2: p.theta2(),
            });
        }
        Ok(p)
    }

    /// Same checks except the density ordering.
    pub fn allowing_unstable(
        rho: [f64; 3],
        mu: [f64; 3],
        permeability: f64,
        gravity: f64,
        c_inf: f64,
    ) -> Result<Self> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")))
            }
        };
        for (i, m) in mu.iter().enumerate() {
            pos(&format!("mu[{i}]"), *m)?;
        }
        for (i, r) in rho.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidParams(format!("rho[{i}] must be finite")));
            }
        }
        pos("permeability", permeability)?;
        pos("gravity", gravity)?;
        pos("c_inf", c_inf)?;
        Ok(Self {
            rho,
            mu,
            permeability,
            gravity,
            c_inf,
        })
    }

    pub fn theta1(&self) -> f64 {
        (self.rho[0] - self.rho[1]) * self.gravity * self.permeability / (self.mu[0] + self.mu[1])
    }

    pub fn theta2(&self) -> f64 {
        (self.rho[1] - self.rho[2]) * self.gravity * self.permeability / (self.mu[1] + self.mu[2])
    }

    pub fn a1(&self) -> f64 {
        (self.mu[0] - self.mu[1]) / (self.mu[0] + self.mu[1])
    }

    pub fn a2(&self) -> f64 {
        (self.mu[1] - self.mu[2]) / (self.mu[1] + self.mu[2])
    }

    pub fn is_density_ordered(&self) -> bool {
        self.rho[2] > self.rho[1] && self.rho[1] > self.rho[0]
    }

    pub fn equal_viscosity(&self) -> bool {
        self.a1() == 0.0 && self.a2() == 0.0
    }

    /// Viscosity-ordering constant; `None` unless `a1 a2 > 0`.
    pub fn m_a(&self) -> Option<f64> {
        let (a1, a2) = (self.a1(), self.a2());
        if a1 * a2 <= 0.0 {
            return None;
        }
        Some(
            [
                (1.0 + a1) / a1.abs(),
                (1.0 - a2) / a2.abs(),
                a1.abs() * (1.0 - a1),
                a2.abs() * (1.0 + a2),
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min),
        )
    }

    /// Nondimensional defaults: unit viscosities, densities 1, 2, 3.
    pub fn reference() -> Self {
        Self::new([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 1.0, 1.0, 1.0).expect("valid reference")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = FluidParams::new([1.0, 2.0, 4.0], [1.0, 3.0, 1.0], 2.0, 9.0, 1.0).unwrap();
        assert_eq!(p.theta1(), -1.0 * 9.0 * 2.0 / 4.0);
        assert_eq!(p.theta2(), -2.0 * 9.0 * 2.0 / 4.0);
        assert_eq!(p.a1(), -0.5);
        assert_eq!(p.a2(), 0.5);
        assert!(p.m_a().is_none());
    }

    #[test]
    fn reversed_densities_rejected() {
        let e = FluidParams::new([2.0, 1.0, 3.0], [1.0; 3], 1.0, 1.0, 1.0).unwrap_err();
        match e {
            Error::UnstableStratification { theta1, .. } => assert!(theta1 > 0.0),
            _ => panic!(),
        }
        assert!(FluidParams::allowing_unstable([2.0, 1.0, 3.0], [1.0; 3], 1.0, 1.0, 1.0).is_ok());
        assert!(FluidParams::new([1.0, 2.0, 3.0], [0.0, 1.0, 1.0], 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn m_a_for_ordered_viscosities() {
        // mu1 > mu2 > mu3 gives a1, a2 > 0
        let p = FluidParams::new([1.0, 2.0, 3.0], [3.0, 2.0, 1.0], 1.0, 1.0, 1.0).unwrap();
        let (a1, a2) = (p.a1(), p.a2());
        let m = p.m_a().unwrap();
        assert!(m > 0.0 && m <= a1 * (1.0 - a1) + 1e-15 && m <= a2 * (1.0 + a2) + 1e-15);
    }
}
