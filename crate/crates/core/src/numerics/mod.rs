//! Special functions, adaptive quadrature and seeded Monte Carlo shared by
//! the physics modules.

pub mod bessel;
pub mod montecarlo;
pub mod quadrature;

pub use bessel::{bessel_k_scaled, i1e, k01e, k0e, k1e, k1e_minus_k0e, BesselOrder, ScaledBesselValue};
pub use montecarlo::{mc_integrate, mc_integrate_gaussian, McAccumulator, McEstimate, McRng};
pub use quadrature::{quad_adaptive, quad_fourier_sine, Domain, QuadratureResult, QuadratureSpec};
