use crate::{Error, Result};

/// The five scaled physical constants of the model, all in recoil units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Collective light shift `N U0` (negative for red detuning).
    pub u0: f64,
    /// Collision energy at uniform density, `N g_c / lambda`.
    pub g: f64,
    /// Cavity-pump detuning `Delta_C`.
    pub delta_c: f64,
    /// Cavity amplitude decay rate `kappa`.
    pub kappa: f64,
    /// Scaled transverse pump `sqrt(N) eta`.
    pub eta: f64,
}

impl ModelParams {
    pub fn new(u0: f64, g: f64, delta_c: f64, kappa: f64, eta: f64) -> Result<Self> {
        let p = Self {
            u0,
            g,
            delta_c,
            kappa,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Operating point of the order-parameter and spectrum figures:
    /// `u0 = -100`, `g = 10`, `Delta_C = -300`, `kappa = 200`.
    pub fn reference(eta: f64) -> Self {
        Self {
            u0: -100.0,
            g: 10.0,
            delta_c: -300.0,
            kappa: 200.0,
            eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.u0, self.g, self.delta_c, self.kappa, self.eta]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("all parameters must be finite"));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParameter("kappa must be non-negative"));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidParameter("eta must be non-negative"));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter("g must be non-negative"));
        }
        Ok(())
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn with_u0(self, u0: f64) -> Self {
        Self { u0, ..self }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    /// Effective cavity detuning of the uniform state, `-Delta_C + u0/2`.
    pub fn delta_c_eff(&self) -> f64 {
        -self.delta_c + 0.5 * self.u0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_rates() {
        assert!(ModelParams::new(-100.0, 10.0, -300.0, -1.0, 0.0).is_err());
        assert!(ModelParams::new(-100.0, 10.0, -300.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(-100.0, -1.0, -300.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0, -300.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(-100.0, 0.0, -300.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn effective_detuning_is_positive_at_reference_point() {
        assert_eq!(ModelParams::reference(0.0).delta_c_eff(), 250.0);
    }
}
