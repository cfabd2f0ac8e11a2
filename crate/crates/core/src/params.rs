use crate::constants::{
    FINE_STRUCTURE, GRW_A, GRW_LAMBDA, HBAR_C_ERG_CM, HBAR_C_MEV_CM, PROTON_MASS_MEV, SPEED_OF_LIGHT,
};
use crate::{Error, Result};

/// Which collapse model a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    /// Nonrelativistic continuous spontaneous localization.
    Csl,
    /// Quasirelativistic CSL.
    Qrcsl,
    /// Relativistic CSL with a tachyonic noise spectrum.
    Rcsl,
}

impl ModelVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Csl => "CSL",
            ModelVariant::Qrcsl => "QRCSL",
            ModelVariant::Rcsl => "RCSL",
        }
    }
}

/// Physical constants and collapse parameters.
///
/// The mass is stored as an inverse Compton wavelength `Mc/ħ` in 1/cm, so
/// `μ = M·a` is dimensionless. `μ` is always recomputed from `M` and `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    a: f64,
    mass: f64,
    alpha_fs: f64,
    c: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::grw()
    }
}

impl ModelParams {
    /// `lambda` in 1/s, `a` in cm, `mass` in 1/cm.
    pub fn new(lambda: f64, a: f64, mass: f64) -> Result<Self> {
        let params = Self {
            lambda,
            a,
            mass,
            alpha_fs: FINE_STRUCTURE,
            c: SPEED_OF_LIGHT,
        };
        params.validate()?;
        Ok(params)
    }

    /// GRW values λ = 10⁻¹⁶ s⁻¹, a = 10⁻⁵ cm for a nucleon (proton mass).
    pub fn grw() -> Self {
        Self {
            lambda: GRW_LAMBDA,
            a: GRW_A,
            mass: Self::mass_from_mev(PROTON_MASS_MEV),
            alpha_fs: FINE_STRUCTURE,
            c: SPEED_OF_LIGHT,
        }
    }

    /// Inverse Compton wavelength (1/cm) of a particle with rest energy `mev`.
    pub fn mass_from_mev(mev: f64) -> f64 {
        mev / HBAR_C_MEV_CM
    }

    fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, value, "must be positive and finite"))
            }
        };
        positive("lambda", self.lambda)?;
        positive("a", self.a)?;
        positive("mass", self.mass)?;
        positive("alpha_fs", self.alpha_fs)?;
        positive("c", self.c)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate().map(|_| self)
    }

    pub fn with_a(mut self, a: f64) -> Result<Self> {
        self.a = a;
        self.validate().map(|_| self)
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        self.mass = mass;
        self.validate().map(|_| self)
    }

    pub fn with_alpha_fs(mut self, alpha_fs: f64) -> Result<Self> {
        self.alpha_fs = alpha_fs;
        self.validate().map(|_| self)
    }

    pub fn with_speed_of_light(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validate().map(|_| self)
    }

    /// Collapse rate, 1/s.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Collapse length, cm.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Inverse Compton wavelength, 1/cm.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mu(&self) -> f64 {
        self.mass * self.a
    }

    pub fn alpha_fs(&self) -> f64 {
        self.alpha_fs
    }

    /// Speed of light, cm/s.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Factor turning a rate in units of λ into 1/s.
    pub fn rate_conversion(&self) -> f64 {
        self.lambda
    }

    /// Factor turning an energy production rate in units of λ·M (per
    /// particle) into erg/s.
    pub fn energy_rate_conversion(&self) -> f64 {
        self.lambda * HBAR_C_ERG_CM * self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grw_defaults() {
        let p = ModelParams::grw();
        assert_eq!(p.lambda(), 1e-16);
        assert_eq!(p.a(), 1e-5);
        // a nucleon Compton wavelength is ~2e-14 cm, so μ is of order 1e9
        assert!(p.mu() > 1e8 && p.mu() < 1e10, "{}", p.mu());
    }

    #[test]
    fn mu_tracks_a() {
        let p = ModelParams::grw().with_a(2e-5).unwrap();
        assert_eq!(p.mu(), p.mass() * 2e-5);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ModelParams::new(1e-16, -1.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::grw().with_mass(f64::NAN).is_err());
    }
}
