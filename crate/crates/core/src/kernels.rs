//! Momentum- and position-space kernels of the QRCSL collapse operator.
//!
//! All functions work in units where the collapse length is `a = 1` unless a
//! mass and length are passed explicitly, in which case any consistent length
//! unit works. Every closed form has an independent quadrature path.
//!
//! Radial reductions used by the quadrature paths (a = 1, `E = √(p² + μ²)`):
//!
//! * on-shell Gaussian, with `p₁` along the polar axis,
//!   `∫d³p/E e^{−(p₁−p)²} = 2π ∫₀^∞ p²/E · e^{−2Q} · (1 − e^{−2u})/u dp`,
//!   where `u = 2p₁p` and `Q = ½(p₁ − p)²[1 − ((p₁ + p)/(E₁ + E))²]` is the
//!   collinear value of `E₁E − p₁·p − μ²`, written without cancellation;
//! * the same without the `1/E` measure for the no-measure integral;
//! * Fourier transform of the on-shell measure,
//!   `∫d³p/E e^{ip·r} = (4π/r)[1/r − ∫₀^∞ sin(pr) M²/(E(E + p)) dp]`,
//!   which splits off the Abel-regularized `∫₀^∞ sin(pr) dp = 1/r`.

use core::f64::consts::PI;

use libm::{exp, expm1, sqrt};

use crate::numerics::bessel::{i1e, k01e, k1e};
use crate::numerics::montecarlo::{fill_standard_normal, mc_integrate, McEstimate, McRng};
use crate::numerics::quadrature::{quad_adaptive, quad_fourier_sine, QuadratureSpec};
use crate::{Error, ModelParams, Result};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Dimension of a kernel value in powers of inverse length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelUnits {
    Dimensionless,
    PerArea,
    PerVolume,
}

impl KernelUnits {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelUnits::Dimensionless => "1",
            KernelUnits::PerArea => "1/a^2",
            KernelUnits::PerVolume => "1/a^3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub units: KernelUnits,
    pub method: Method,
}

const KERNEL_TOLERANCE: f64 = 1e-11;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("mu", mu, "mu > 0"))
    }
}

/// `K₁(z)` for moderate `z`; underflows to zero past `z ≈ 745`.
fn bessel_k1(z: f64) -> f64 {
    exp(-z) * k1e(z)
}

/// Equal-time commutator c-number `M² K₁(Ms) / (2π² s)` at spacelike
/// separation `s`. Units are inverse volume in whatever length unit `s`
/// and `1/M` share.
pub fn commutator_kernel(s: f64, mass: f64) -> Result<KernelValue> {
    if !(s > 0.0) || s.is_infinite() {
        return Err(Error::domain("s", s, "spacelike separation s > 0"));
    }
    if !(mass > 0.0) || mass.is_infinite() {
        return Err(Error::domain("M", mass, "M > 0"));
    }
    Ok(KernelValue {
        value: mass * mass * bessel_k1(mass * s) / (2.0 * PI * PI * s),
        units: KernelUnits::PerVolume,
        method: Method::ClosedForm,
    })
}

/// `Q = E₁E₂ − p₁p₂ − μ²` for collinear momenta, free of cancellation.
/// Nonnegative, zero only at `p₁ = p₂`.
pub fn onshell_half_interval(p1: f64, p2: f64, mu: f64) -> f64 {
    let e1 = sqrt(p1 * p1 + mu * mu);
    let e2 = sqrt(p2 * p2 + mu * mu);
    let v = (p1 + p2) / (e1 + e2);
    let dp = p1 - p2;
    0.5 * dp * dp * (1.0 - v) * (1.0 + v)
}

/// `(1 − e^{−2u}) / u`, tending to 2 at `u = 0`.
fn angular_factor(u: f64) -> f64 {
    if u < 1e-300 {
        2.0
    } else {
        -expm1(-2.0 * u) / u
    }
}

fn peak_breaks(p1: f64, mu: f64) -> alloc::vec::Vec<f64> {
    let e1 = sqrt(p1 * p1 + mu * mu);
    let width = e1 / mu;
    let mut breaks = alloc::vec::Vec::new();
    for j in -12..=12 {
        breaks.push(p1 + j as f64 * width);
    }
    breaks.push(1.0 / mu);
    breaks
}

/// `∫d³p₂/E₂ e^{−(p₁−p₂)²}` (four-vector square) in closed form:
/// `2π e^{2μ²} K₁(2μ²)`, in units of `1/a²`. Independent of `p₁`.
pub fn gaussian_onshell_integral(p1: f64, mu: f64) -> Result<KernelValue> {
    check_mu(mu)?;
    if !(p1 >= 0.0) || p1.is_infinite() {
        return Err(Error::domain("p1", p1, "p1 >= 0"));
    }
    Ok(KernelValue {
        value: 2.0 * PI * k1e(2.0 * mu * mu),
        units: KernelUnits::PerArea,
        method: Method::ClosedForm,
    })
}

/// Radial quadrature of the same integral at momentum magnitude `p1`.
pub fn gaussian_onshell_integral_quadrature(p1: f64, mu: f64) -> Result<KernelValue> {
    check_mu(mu)?;
    if !(p1 >= 0.0) || p1.is_infinite() {
        return Err(Error::domain("p1", p1, "p1 >= 0"));
    }
    let integrand = |p: f64| {
        let e = sqrt(p * p + mu * mu);
        p * p / e * exp(-2.0 * onshell_half_interval(p1, p, mu)) * angular_factor(2.0 * p1 * p)
    };
    let spec = QuadratureSpec::semi_infinite(0.0)
        .with_breaks(&peak_breaks(p1, mu))
        .relative_tolerance(KERNEL_TOLERANCE);
    Ok(KernelValue {
        value: 2.0 * PI * quad_adaptive(integrand, &spec)?,
        units: KernelUnits::PerArea,
        method: Method::Quadrature,
    })
}

fn energy_check(e1: f64) -> Result<()> {
    if e1 >= 1.0 && e1.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("E1", e1, "on shell: E1 >= M"))
    }
}

/// `∫d³p₂ e^{−(p₁−p₂)²} = 2π E₁ e^{2μ²}[K₀(2μ²) + K₁(2μ²)/μ²]` with
/// `e1 = E₁/M`; units `1/a³`.
pub fn gaussian_nomeasure_integral(e1: f64, mu: f64) -> Result<KernelValue> {
    check_mu(mu)?;
    energy_check(e1)?;
    Ok(KernelValue {
        value: 2.0 * PI * e1 * mu * nomeasure_bracket(mu),
        units: KernelUnits::PerVolume,
        method: Method::ClosedForm,
    })
}

/// `e^{2μ²}[K₀(2μ²) + K₁(2μ²)/μ²]`.
pub fn nomeasure_bracket(mu: f64) -> f64 {
    let (k0, k1) = k01e(2.0 * mu * mu);
    k0 + k1 / (mu * mu)
}

pub fn gaussian_nomeasure_integral_quadrature(e1: f64, mu: f64) -> Result<KernelValue> {
    check_mu(mu)?;
    energy_check(e1)?;
    let p1 = mu * sqrt((e1 - 1.0) * (e1 + 1.0));
    let integrand = |p: f64| p * p * exp(-2.0 * onshell_half_interval(p1, p, mu)) * angular_factor(2.0 * p1 * p);
    let spec = QuadratureSpec::semi_infinite(0.0)
        .with_breaks(&peak_breaks(p1, mu))
        .relative_tolerance(KERNEL_TOLERANCE);
    Ok(KernelValue {
        value: 2.0 * PI * quad_adaptive(integrand, &spec)?,
        units: KernelUnits::PerVolume,
        method: Method::Quadrature,
    })
}

fn fourier_args(r: f64, mass: f64) -> Result<()> {
    if !(r > 0.0) || r.is_infinite() {
        return Err(Error::domain("r", r, "r > 0"));
    }
    if !(mass > 0.0) || mass.is_infinite() {
        return Err(Error::domain("M", mass, "M > 0"));
    }
    Ok(())
}

/// `∫d³p/E e^{ip·r} = 4π M K₁(Mr)/r`, inverse area.
pub fn fourier_onshell_kernel(r: f64, mass: f64) -> Result<KernelValue> {
    fourier_args(r, mass)?;
    Ok(KernelValue {
        value: 4.0 * PI * mass * bessel_k1(mass * r) / r,
        units: KernelUnits::PerArea,
        method: Method::ClosedForm,
    })
}

pub fn fourier_onshell_kernel_quadrature(r: f64, mass: f64) -> Result<KernelValue> {
    fourier_args(r, mass)?;
    let m2 = mass * mass;
    let g = |p: f64| {
        let e = sqrt(p * p + m2);
        m2 / (e * (e + p))
    };
    let per_cycle = QuadratureSpec::finite(0.0, 1.0)
        .relative_tolerance(1e-13)
        .absolute_tolerance(1e-15 / r);
    let tail = quad_fourier_sine(g, r, &per_cycle, 2000)?;
    Ok(KernelValue {
        value: 4.0 * PI / r * (1.0 / r - tail),
        units: KernelUnits::PerArea,
        method: Method::Quadrature,
    })
}

/// `∫d³z K₁(M|z|)/|z|` by radial quadrature; exact value `2π²/M²`.
pub fn fourier_kernel_volume_integral(mass: f64) -> Result<f64> {
    if !(mass > 0.0) || mass.is_infinite() {
        return Err(Error::domain("M", mass, "M > 0"));
    }
    let spec = QuadratureSpec::semi_infinite(0.0)
        .with_breaks(&[1.0, 10.0])
        .relative_tolerance(1e-13);
    let u_k1 = quad_adaptive(|u| if u == 0.0 { 1.0 } else { u * bessel_k1(u) }, &spec)?;
    Ok(4.0 * PI * u_k1 / (mass * mass))
}

/// Variance of each component of the 4-vector separation `b − b′`.
const SMEAR_VARIANCE: f64 = 2.0;
/// Share of samples drawn from the origin-centred proposal.
const DEFENSIVE_SHARE: f64 = 0.5;
/// Relative standard error above which a profile value is flagged.
pub const LOW_CONFIDENCE: f64 = 0.2;

/// Commutator kernel at Euclidean 4-distance `rho`, `a = 1`.
fn smeared_kernel(rho: f64, mu: f64) -> f64 {
    mu * mu * bessel_k1(mu * rho) / (2.0 * PI * PI * rho)
}

/// Importance sampler for `E[K(|d e₁ + b − b′|)]` with `b, b′` drawn from
/// four-dimensional unit Gaussians (three space components and the
/// imaginary time shift, which turns the invariant interval Euclidean).
///
/// Plain sampling has infinite variance because the kernel grows like
/// `1/ρ²` near the light cone apex, so samples come from a defensive
/// mixture of the nominal Gaussian and an origin-centred proposal with
/// `ρ ~ Gamma(2, 1/μ)` and uniform direction; each draw is reweighted.
pub fn commutator_profile_sampler(d: f64, mu: f64) -> Result<impl Fn(&mut McRng) -> f64 + Sync> {
    check_mu(mu)?;
    if !(d >= 0.0) || d.is_infinite() {
        return Err(Error::domain("d", d, "d >= 0"));
    }
    let scale = 1.0 / mu;
    let radial = Gamma::new(2.0, scale).map_err(|_| Error::Invalid("bad proposal scale"))?;
    let sampler = move |rng: &mut McRng| {
        let mut w = [0.0; 4];
        if rng.random::<f64>() < DEFENSIVE_SHARE {
            let mut dir = [0.0; 4];
            fill_standard_normal(rng, &mut dir);
            let norm = sqrt(dir.iter().map(|x| x * x).sum::<f64>());
            let rho: f64 = radial.sample(rng);
            for k in 0..4 {
                w[k] = rho * dir[k] / norm;
            }
        } else {
            let mut b = [0.0; 8];
            fill_standard_normal(rng, &mut b);
            for k in 0..4 {
                w[k] = b[k] - b[k + 4];
            }
            w[0] += d;
        }
        let rho = sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if rho == 0.0 {
            return 0.0;
        }
        let shift2 = (w[0] - d) * (w[0] - d) + w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
        let nominal = exp(-shift2 / (2.0 * SMEAR_VARIANCE)) / (4.0 * PI * PI * SMEAR_VARIANCE * SMEAR_VARIANCE);
        let proposal = exp(-rho / scale) / (2.0 * PI * PI * scale * scale * rho * rho);
        let mixture = (1.0 - DEFENSIVE_SHARE) * nominal + DEFENSIVE_SHARE * proposal;
        smeared_kernel(rho, mu) * nominal / mixture
    };
    Ok(sampler)
}

/// Smeared commutator magnitude at separation `d` relative to `d = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEstimate {
    pub ratio: McEstimate,
    /// Relative standard error exceeds [`LOW_CONFIDENCE`].
    pub low_confidence: bool,
}

/// Ratio of two raw profile estimates with first-order error propagation.
/// The two are treated as independent, which overstates the error when
/// they share a seed.
pub fn profile_ratio(at_d: &McEstimate, at_zero: &McEstimate, same_point: bool) -> ProfileEstimate {
    let (mean, std_error) = if same_point {
        (1.0, 0.0)
    } else {
        let ratio = at_d.mean / at_zero.mean;
        let r1 = at_d.relative_error();
        let r0 = at_zero.relative_error();
        (ratio, ratio.abs() * sqrt(r1 * r1 + r0 * r0))
    };
    let ratio = McEstimate {
        mean,
        std_error,
        n_samples: at_d.n_samples,
        seed: at_d.seed,
    };
    ProfileEstimate {
        low_confidence: ratio.relative_error() > LOW_CONFIDENCE,
        ratio,
    }
}

/// Monte Carlo quasilocality profile at equal times, normalized to unity at
/// `d = 0`; `d` in units of `a`.
pub fn smeared_commutator_profile(d: f64, params: &ModelParams, n_samples: u64, seed: u64) -> Result<ProfileEstimate> {
    let mu = params.mu();
    let at_zero = mc_integrate(commutator_profile_sampler(0.0, mu)?, n_samples, seed)?;
    if d == 0.0 {
        return Ok(profile_ratio(&at_zero, &at_zero, true));
    }
    let at_d = mc_integrate(commutator_profile_sampler(d, mu)?, n_samples, seed)?;
    Ok(profile_ratio(&at_d, &at_zero, false))
}

/// Radial density of `|w|` for `w ~ N(d e₁, σ² I₄)`:
/// `ρ³ (2πσ²)⁻² 4π² I₁(κ)/κ e^{−(ρ² + d²)/2σ²}`, `κ = ρd/σ²`.
fn smeared_radial_density(rho: f64, d: f64) -> f64 {
    let s2 = SMEAR_VARIANCE;
    let kappa = rho * d / s2;
    let bessel_ratio = if kappa < 1e-8 {
        0.5 * exp(-kappa)
    } else {
        i1e(kappa) / kappa
    };
    let gauss = exp(-(rho - d) * (rho - d) / (2.0 * s2));
    rho * rho * rho * 4.0 * PI * PI / (4.0 * PI * PI * s2 * s2) * bessel_ratio * gauss
}

/// Unnormalized smeared kernel `E[K(|w|)]` by one-dimensional radial
/// quadrature.
pub fn smeared_commutator_quadrature(d: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(d >= 0.0) || d.is_infinite() {
        return Err(Error::domain("d", d, "d >= 0"));
    }
    let f = |rho: f64| {
        if rho == 0.0 {
            0.0
        } else {
            smeared_kernel(rho, mu) * smeared_radial_density(rho, d)
        }
    };
    let inv = 1.0 / mu;
    let spec = QuadratureSpec::semi_infinite(0.0)
        .with_breaks(&[inv, 4.0 * inv, 16.0 * inv, 0.5 * d, d, d + 4.0])
        .relative_tolerance(1e-10);
    quad_adaptive(f, &spec)
}

/// Profile normalized to `d = 0` by quadrature.
pub fn smeared_commutator_profile_quadrature(d: f64, mu: f64) -> Result<f64> {
    Ok(smeared_commutator_quadrature(d, mu)? / smeared_commutator_quadrature(0.0, mu)?)
}
