//! Collapse rate of a free particle in a two-packet superposition and the
//! energy creation rate of free particles.
//!
//! Units: `a = 1`. Packets are `φ(x) ∝ exp(−|x − c|²/4σ²)`, so `σ` is the
//! standard deviation of `|φ|²` along each axis. The superposition is
//! `α φ_L + β φ_R` with `α = √w_L`, `β = √(1 − w_L)`.
//!
//! The decay rate of `ρ(x_L, x_R)` under the exact position-space equation
//! is `λ C (T_L + T_R)` with `C = μ³ e^{2μ²}K₁(2μ²) / (2π^{5/2})` and
//!
//! ```text
//! T_L = (α J_self + β J_cross) / (α + β e^{−D²/4σ²})
//! T_R = (β J_self + α J_cross) / (β + α e^{−D²/4σ²})
//! J_self  = 4π ∫ r K₁(μr) e^{−r²/4σ²} dr
//! J_cross = 2π ∫ r K₁(μr) e^{−(r−D)²/4σ²} (1 − e^{−2κ})/κ dr,  κ = rD/2σ²
//! ```
//!
//! The momentum-space route integrates the Fourier transform of the
//! packets against the on-shell measure instead and serves as an
//! independent check.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, expm1, sin, sqrt};

use crate::kernels::{gaussian_nomeasure_integral_quadrature, gaussian_onshell_integral_quadrature, Method};
use crate::numerics::bessel::{k1e, k1e_minus_k0e};
use crate::numerics::quadrature::{quad_adaptive, QuadratureSpec};
use crate::{Error, ModelParams, ModelVariant, Result};

const RATE_TOLERANCE: f64 = 1e-11;
const TRUNCATION_TOLERANCE: f64 = 1e-8;

/// Two Gaussian packets of common width on the first axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPacketState {
    separation: f64,
    width: f64,
    weight_left: f64,
}

impl TwoPacketState {
    pub fn new(separation: f64, width: f64, weight_left: f64) -> Result<Self> {
        if !(separation >= 0.0) || separation.is_infinite() {
            return Err(Error::domain("separation", separation, "separation >= 0"));
        }
        if !(width > 0.0) || width.is_infinite() {
            return Err(Error::domain("width", width, "width > 0"));
        }
        if !(0.0..=1.0).contains(&weight_left) {
            return Err(Error::domain("weight_L", weight_left, "0 <= weight_L <= 1"));
        }
        Ok(Self {
            separation,
            width,
            weight_left,
        })
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn weight_left(&self) -> f64 {
        self.weight_left
    }

    /// Packets far enough apart that their supports are disjoint.
    pub fn widely_separated(&self) -> bool {
        self.separation >= 5.0 * (self.width + 1.0)
    }
}

/// A rate in units of its natural scale plus the physical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub model: ModelVariant,
    pub value_dimensionless: f64,
    /// `value_dimensionless * conversion`.
    pub value_physical: f64,
    pub conversion: f64,
    pub mu: f64,
    /// Set when the input lies outside the regime where the model's limit
    /// statements apply (e.g. packets narrower than two Compton lengths).
    pub regime_warning: bool,
}

impl RateResult {
    fn new(model: ModelVariant, value: f64, conversion: f64, mu: f64) -> Self {
        Self {
            model,
            value_dimensionless: value,
            value_physical: value * conversion,
            conversion,
            mu,
            regime_warning: false,
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("mu", mu, "mu > 0"))
    }
}

/// `r K₁(μr)`, equal to `1/μ` at `r = 0`.
fn r_k1(r: f64, mu: f64) -> f64 {
    if r == 0.0 {
        1.0 / mu
    } else {
        r * exp(-mu * r) * k1e(mu * r)
    }
}

fn k1(z: f64) -> f64 {
    exp(-z) * k1e(z)
}

/// `C = μ³ e^{2μ²}K₁(2μ²) / (2π^{5/2})`.
pub fn collapse_prefactor(mu: f64) -> f64 {
    mu * mu * mu * k1e(2.0 * mu * mu) / (2.0 * PI * PI * sqrt(PI))
}

fn kernel_breaks(mu: f64, width: f64, extra: &[f64]) -> Vec<f64> {
    let inv = 1.0 / mu;
    let mut b = alloc::vec![inv, 4.0 * inv, 16.0 * inv, 64.0 * inv, width, 2.0 * width, 4.0 * width];
    b.extend_from_slice(extra);
    b
}

fn self_overlap(mu: f64, width: f64, radius: f64) -> Result<f64> {
    let s4 = 4.0 * width * width;
    let spec = QuadratureSpec::finite(0.0, radius)
        .with_breaks(&kernel_breaks(mu, width, &[]))
        .relative_tolerance(RATE_TOLERANCE);
    Ok(4.0 * PI * quad_adaptive(|r| r_k1(r, mu) * exp(-r * r / s4), &spec)?)
}

fn cross_overlap(mu: f64, width: f64, separation: f64, radius: f64) -> Result<f64> {
    if separation == 0.0 {
        return self_overlap(mu, width, radius);
    }
    let s2 = 2.0 * width * width;
    let s4 = 2.0 * s2;
    let d = separation;
    let integrand = |r: f64| {
        let kappa = r * d / s2;
        let angular = if kappa < 1e-300 {
            2.0
        } else {
            -expm1(-2.0 * kappa) / kappa
        };
        r_k1(r, mu) * exp(-(r - d) * (r - d) / s4) * angular
    };
    let extra = [d - 4.0 * width, d - width, d, d + width, d + 4.0 * width];
    let spec = QuadratureSpec::finite(0.0, d + radius)
        .with_breaks(&kernel_breaks(mu, width, &extra))
        .absolute_tolerance(1e-300)
        .relative_tolerance(RATE_TOLERANCE);
    Ok(2.0 * PI * quad_adaptive(integrand, &spec)?)
}

/// Truncation radius `max(8σ, 40/μ)`, enlarged until the kernel tail bound
/// is below `10⁻⁸` of the self overlap.
pub fn truncation_radius(mu: f64, width: f64) -> Result<f64> {
    let mut radius = (8.0 * width).max(40.0 / mu);
    for _ in 0..16 {
        let j_self = self_overlap(mu, width, radius)?;
        let s2 = width * width;
        let tail = 4.0 * PI * radius * k1(mu * radius) * 2.0 * s2 * exp(-radius * radius / (4.0 * s2));
        if tail <= TRUNCATION_TOLERANCE * j_self {
            return Ok(radius);
        }
        radius *= 1.5;
    }
    Err(Error::Accuracy {
        estimate: radius,
        abs_error: f64::NAN,
    })
}

fn packet_amplitudes(state: &TwoPacketState) -> Result<(f64, f64)> {
    let w = state.weight_left;
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::domain(
            "weight_L",
            w,
            "0 < weight_L < 1 (the coherence must be nonzero)",
        ));
    }
    Ok((sqrt(w), sqrt(1.0 - w)))
}

/// Overlap terms `(J_self, J_cross)` by position-space quadrature.
pub fn position_overlaps(state: &TwoPacketState, mu: f64) -> Result<(f64, f64)> {
    check_mu(mu)?;
    let radius = truncation_radius(mu, state.width)?;
    Ok((
        self_overlap(mu, state.width, radius)?,
        cross_overlap(mu, state.width, state.separation, radius)?,
    ))
}

fn combine(state: &TwoPacketState, prefactor: f64, j_self: f64, j_cross: f64) -> Result<f64> {
    let (alpha, beta) = packet_amplitudes(state)?;
    let w = state.width;
    let g = exp(-state.separation * state.separation / (4.0 * w * w));
    let t_left = (alpha * j_self + beta * j_cross) / (alpha + beta * g);
    let t_right = (beta * j_self + alpha * j_cross) / (beta + alpha * g);
    Ok(prefactor * (t_left + t_right))
}

/// Effective decay rate of `ρ(x_L, x_R)` in units of λ, from the exact
/// position-space equation.
pub fn collapse_rate_dimensionless(state: &TwoPacketState, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let (j_self, j_cross) = position_overlaps(state, mu)?;
    combine(state, collapse_prefactor(mu), j_self, j_cross)
}

/// The same rate through the momentum-space form: the on-shell Gaussian
/// integral is done by quadrature and the packets enter through their
/// Fourier transforms `(4πσ²)^{3/2} e^{−σ²p²}`.
pub fn collapse_rate_momentum_space(state: &TwoPacketState, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let w = state.width;
    let d = state.separation;
    let onshell = gaussian_onshell_integral_quadrature(0.0, mu)?.value;
    let s2 = w * w;
    let coefficient = 0.5 * mu * mu * onshell * libm::pow(4.0 * PI * s2 / (4.0 * PI * PI * PI), 1.5);
    let energy = |p: f64| sqrt(p * p + mu * mu);
    let cutoff = sqrt(800.0 / s2);
    let spec = QuadratureSpec::finite(0.0, cutoff)
        .with_breaks(&[1.0 / w, 3.0 / w, 6.0 / w, mu])
        .relative_tolerance(RATE_TOLERANCE);
    let self_term = 4.0 * PI * quad_adaptive(|p| p * p / energy(p) * exp(-s2 * p * p), &spec)?;
    let cross_term = if d == 0.0 {
        self_term
    } else {
        let spec = spec.clone().absolute_tolerance(1e-14 * self_term);
        4.0 * PI
            * quad_adaptive(
                |p| {
                    let sinc = if p == 0.0 { 1.0 } else { sin(p * d) / (p * d) };
                    p * p / energy(p) * exp(-s2 * p * p) * sinc
                },
                &spec,
            )?
    };
    combine(state, coefficient, self_term, cross_term)
}

/// Collapse rate of the two-packet coherence with physical conversion.
/// Requires widely separated packets and `0 < weight_L < 1`.
pub fn collapse_decay_rate(state: &TwoPacketState, params: &ModelParams) -> Result<RateResult> {
    if !state.widely_separated() {
        return Err(Error::domain(
            "separation",
            state.separation,
            "separation >= 5 (width + 1) for disjoint packet supports",
        ));
    }
    let mu = params.mu();
    let value = collapse_rate_dimensionless(state, mu)?;
    let mut result = RateResult::new(ModelVariant::Qrcsl, value, params.rate_conversion(), mu);
    result.regime_warning = state.width <= 2.0 / mu;
    Ok(result)
}

/// Magnitude of the dropped `A ρ A` term relative to the kept terms at
/// `t = 0` and `E₁ = E₂ = M`, where each factor collapses to
/// `e^{−(x − x_c)²/2} δ(z − x_c)`. Transverse directions cancel in the
/// ratio; the remaining axial overlap is integrated numerically. The packet
/// width drops out once the momentum factors become delta functions.
pub fn cross_term_bound(state: &TwoPacketState) -> Result<f64> {
    let d = state.separation;
    let spec = QuadratureSpec::real_line()
        .with_breaks(&[-0.5 * d, 0.5 * d])
        .absolute_tolerance(1e-300)
        .relative_tolerance(1e-12);
    let dropped = quad_adaptive(
        |x| exp(-0.5 * ((x + 0.5 * d) * (x + 0.5 * d) + (x - 0.5 * d) * (x - 0.5 * d))),
        &spec,
    )?;
    let kept = quad_adaptive(|x| exp(-x * x), &QuadratureSpec::real_line().relative_tolerance(1e-12))?;
    Ok(dropped / kept)
}

/// Energy creation rate `g(μ)` in units of `λ n M`:
/// `(2μ/√π) e^{2μ²}[K₀(2μ²) − K₁(2μ²)(1 − μ⁻²)]`.
pub fn energy_rate_dimensionless(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let z = 2.0 * mu * mu;
    let bracket = k1e(z) / (mu * mu) - k1e_minus_k0e(z);
    Ok(2.0 * mu / sqrt(PI) * bracket)
}

/// Nonrelativistic asymptote `3/(4μ²)` of [`energy_rate_dimensionless`].
pub fn energy_rate_asymptote(mu: f64) -> f64 {
    0.75 / (mu * mu)
}

/// Energy creation rate for `n` particles, physical value in erg/s.
pub fn energy_rate_exact(params: &ModelParams, n: f64) -> Result<RateResult> {
    if !(n >= 1.0) || n.is_infinite() {
        return Err(Error::domain("n", n, "n >= 1"));
    }
    let mu = params.mu();
    let g = energy_rate_dimensionless(mu)?;
    Ok(RateResult::new(
        ModelVariant::Qrcsl,
        g,
        n * params.energy_rate_conversion(),
        mu,
    ))
}

/// Occupation of momentum magnitudes (units `1/a`); weights sum to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    momenta: Vec<f64>,
    weights: Vec<f64>,
}

impl MomentumDistribution {
    pub fn new(momenta: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if momenta.len() != weights.len() {
            return Err(Error::Invalid("momenta and weights differ in length"));
        }
        if let Some(&p) = momenta.iter().find(|p| !(**p >= 0.0) || p.is_infinite()) {
            return Err(Error::domain("momentum", p, "finite and >= 0"));
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || w.is_infinite()) {
            return Err(Error::domain("weight", w, "finite and >= 0"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::domain("particle count", total, "total weight > 0"));
        }
        Ok(Self { momenta, weights })
    }

    /// All `n` particles at momentum `p`.
    pub fn point(p: f64, n: f64) -> Result<Self> {
        Self::new(alloc::vec![p], alloc::vec![n])
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Energy creation rate summed directly over the occupation: per momentum
/// `(μ²/π^{3/2}) [I_nm(p)/E − I_os(p)]`, where `I_nm` and `I_os` are the
/// no-measure and on-shell Gaussian integrals. With `method` set to
/// quadrature both integrals are evaluated numerically at each momentum.
pub fn energy_rate_direct(dist: &MomentumDistribution, params: &ModelParams, method: Method) -> Result<RateResult> {
    let mu = params.mu();
    check_mu(mu)?;
    let mut sum = 0.0;
    for (&p, &w) in dist.momenta.iter().zip(&dist.weights) {
        if w == 0.0 {
            continue;
        }
        let e = sqrt(p * p + mu * mu);
        let (nomeasure, onshell) = match method {
            Method::Quadrature => (
                gaussian_nomeasure_integral_quadrature(e / mu, mu)?.value,
                gaussian_onshell_integral_quadrature(p, mu)?.value,
            ),
            _ => (
                crate::kernels::gaussian_nomeasure_integral(e / mu, mu)?.value,
                crate::kernels::gaussian_onshell_integral(p, mu)?.value,
            ),
        };
        sum += w * (nomeasure / e - onshell);
    }
    let n = dist.total();
    let g = mu * mu / (PI * sqrt(PI)) * sum / (n * mu);
    Ok(RateResult::new(
        ModelVariant::Qrcsl,
        g,
        n * params.energy_rate_conversion(),
        mu,
    ))
}
