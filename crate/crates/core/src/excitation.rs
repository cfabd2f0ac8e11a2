//! First-order collapse-induced excitation of bound states.
//!
//! Two routes to the rate `Γ = λ ∫dx |⟨f|A(x)|i⟩|²`:
//!
//! * the exact Gaussian-kernel double matrix element, evaluated by
//!   quadrature for a two-particle isotropic oscillator, and
//! * its leading term in (size/a)², which needs only the second moments
//!   `⟨f|Σ X_n²|i⟩` and `⟨f|Σ X_n^i X_n^j|i⟩`.
//!
//! The RCSL counterparts replace the Gaussian kernel with
//! `sin(k|z|)/|z|`. The ⁷⁴Ge predictions eliminate the unknown quadrupole
//! strength through the measured lifetime of the 2⁺ state.

use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};
use num_complex::Complex64;

use crate::constants::{GE_EMISSION_BOUND, HBAR_C_MEV_CM, SECONDS_PER_DAY};
use crate::numerics::{quad_adaptive, QuadratureSpec};
use crate::params::ModelParams;
use crate::{Error, Result};

/// Transition data for a collapse-induced nuclear excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct NucleusSpec {
    pub label: &'static str,
    /// Photon wavenumber of the transition, 1/cm.
    pub k: f64,
    /// Lifetime of the excited state, s.
    pub tau: f64,
    /// Transition energy, MeV. Informational.
    pub delta_e: f64,
    pub nuclei_per_kg: f64,
}

/// ⁷⁴Ge nuclei per kg of natural germanium.
pub const GE74_NUCLEI_PER_KG: f64 = 3.0e24;
/// All germanium nuclei per kg.
pub const GE_ALL_NUCLEI_PER_KG: f64 = 8.3e24;

impl NucleusSpec {
    pub fn new(label: &'static str, k: f64, tau: f64, delta_e: f64, nuclei_per_kg: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("tau", tau), ("nuclei_per_kg", nuclei_per_kg)] {
            if !(v > 0.0) || v.is_infinite() {
                return Err(Error::domain(name, v, "positive and finite"));
            }
        }
        Ok(Self {
            label,
            k,
            tau,
            delta_e,
            nuclei_per_kg,
        })
    }

    /// 0⁺ → 2⁺ at 0.596 MeV in ⁷⁴Ge: k = 3.2·10¹⁰/cm, τ = 17.9 ps.
    pub fn ge74() -> Self {
        Self {
            label: "Ge-74",
            k: 3.2e10,
            tau: 17.9e-12,
            delta_e: 0.596,
            nuclei_per_kg: GE74_NUCLEI_PER_KG,
        }
    }

    /// Same transition counted against every Ge nucleus per kg.
    pub fn ge74_all_isotopes() -> Self {
        Self {
            label: "Ge-74 (all Ge nuclei)",
            nuclei_per_kg: GE_ALL_NUCLEI_PER_KG,
            ..Self::ge74()
        }
    }

    /// Per-nucleus rate (1/s) to counts per kg per day.
    pub fn counts_per_kg_day(&self, rate: f64) -> f64 {
        rate * self.nuclei_per_kg * SECONDS_PER_DAY
    }
}

/// Wavenumber `√(ΔE² + a⁻²)` that the tachyonic noise spectrum selects,
/// with `ΔE` in MeV and `a` in cm.
pub fn tachyonic_wavenumber(delta_e_mev: f64, a: f64) -> Result<f64> {
    if !(delta_e_mev >= 0.0) || !(a > 0.0) {
        return Err(Error::Invalid("tachyonic wavenumber needs delta_e >= 0 and a > 0"));
    }
    let k = delta_e_mev / HBAR_C_MEV_CM;
    Ok(sqrt(k * k + 1.0 / (a * a)))
}

/// Matrix elements between orthogonal states with vanishing centre of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentData {
    /// `⟨f|i⟩`; must vanish.
    pub overlap: Complex64,
    /// `⟨f|Σ_n X_n²|i⟩`.
    pub trace: Complex64,
    /// `⟨f|Σ_n X_n^i X_n^j|i⟩`.
    pub tensor: [[Complex64; 3]; 3],
}

const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

impl SecondMomentData {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            overlap: z,
            trace: z,
            tensor: [[z; 3]; 3],
        }
    }

    /// `|⟨f|ΣX²|i⟩|² + 2 Σ_ij |⟨f|ΣX^iX^j|i⟩|²`.
    pub fn bracket(&self) -> Result<f64> {
        if self.overlap.norm() > ORTHOGONALITY_TOLERANCE {
            return Err(Error::domain(
                "overlap",
                self.overlap.norm(),
                "initial and final states orthogonal",
            ));
        }
        let tensor: f64 = self.tensor.iter().flatten().map(|z| z.norm_sqr()).sum();
        Ok(self.trace.norm_sqr() + 2.0 * tensor)
    }
}

/// Leading-order QRCSL/CSL rate `λ(2a)⁻⁴ · bracket`. Lengths in any unit
/// shared by `a` and the moments.
pub fn excitation_rate_series(data: &SecondMomentData, lambda: f64, a: f64) -> Result<f64> {
    check_lambda_a(lambda, a)?;
    let a2 = 2.0 * a;
    Ok(lambda * data.bracket()? / (a2 * a2 * a2 * a2))
}

/// Leading-order RCSL rate `2λak⁵/(5!π²) · bracket`.
pub fn rcsl_rate_series(data: &SecondMomentData, k: f64, lambda: f64, a: f64) -> Result<f64> {
    check_lambda_a(lambda, a)?;
    check_k(k)?;
    Ok(2.0 * lambda * a * k.powi(5) / (120.0 * PI * PI) * data.bracket()?)
}

fn check_lambda_a(lambda: f64, a: f64) -> Result<()> {
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::domain("lambda", lambda, "lambda >= 0"));
    }
    if !(a > 0.0) || a.is_infinite() {
        return Err(Error::domain("a", a, "a > 0"));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || k.is_infinite() {
        return Err(Error::domain("k", k, "k > 0"));
    }
    Ok(())
}

/// Relative-coordinate oscillator states `r^l e^{−r²/2b²} Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OscillatorState {
    /// n = 0, l = 0.
    Ground,
    /// n = 0, l = 2, magnetic quantum number in `−2..=2`.
    Quadrupole(i8),
}

/// Two equal-mass particles bound by an isotropic oscillator, centre of
/// mass at rest at the origin, so `X₁ = r/2`, `X₂ = −r/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorOracleConfig {
    /// Oscillator length, same unit as `a`.
    pub b: f64,
    pub initial: OscillatorState,
    pub final_state: OscillatorState,
}

impl OscillatorOracleConfig {
    pub fn new(b: f64, initial: OscillatorState, final_state: OscillatorState) -> Result<Self> {
        if !(b > 0.0) || b.is_infinite() {
            return Err(Error::domain("b", b, "b > 0"));
        }
        for s in [initial, final_state] {
            if let OscillatorState::Quadrupole(m) = s {
                if !(-2..=2).contains(&m) {
                    return Err(Error::domain("m", m as f64, "|m| <= 2"));
                }
            }
        }
        match (initial, final_state) {
            (OscillatorState::Ground, OscillatorState::Quadrupole(_))
            | (OscillatorState::Quadrupole(_), OscillatorState::Ground) => Ok(Self {
                b,
                initial,
                final_state,
            }),
            (x, y) if x == y => Err(Error::domain(
                "final state",
                b,
                "final state differs from the initial state",
            )),
            _ => Err(Error::Invalid("only ground <-> quadrupole transitions are modelled")),
        }
    }

    /// Ground → quadrupole (m = 0).
    pub fn ground_to_quadrupole(b: f64) -> Result<Self> {
        Self::new(b, OscillatorState::Ground, OscillatorState::Quadrupole(0))
    }

    fn m(&self) -> i8 {
        match (self.initial, self.final_state) {
            (OscillatorState::Quadrupole(m), _) | (_, OscillatorState::Quadrupole(m)) => m,
            _ => 0,
        }
    }

    /// Radial transition density `c r² e^{−r²/b²}` has this `c`, with the
    /// angular part `Y_2m*` split off.
    fn density_coefficient(&self) -> f64 {
        let b = self.b;
        // N₀² = 4/(√π b³), N₂² = 16/(15√π b⁷), Y₀₀ = 1/√(4π)
        let n0 = sqrt(4.0 / (sqrt(PI) * b * b * b));
        let n2 = sqrt(16.0 / (15.0 * sqrt(PI) * b.powi(7)));
        n0 * n2 / sqrt(4.0 * PI)
    }

    /// Second moments by quadrature over the radial and angular variables.
    pub fn second_moments(&self) -> Result<SecondMomentData> {
        let b = self.b;
        let c = self.density_coefficient();
        let radial = quad_adaptive(
            |r| r.powi(6) * exp(-r * r / (b * b)),
            &QuadratureSpec::finite(0.0, 12.0 * b).relative_tolerance(1e-13),
        )?;
        // X_n^i X_n^j = r^i r^j / 4 for both particles.
        let scale = c * radial * 0.5;
        let m = self.m();
        let final_is_quadrupole = matches!(self.final_state, OscillatorState::Quadrupole(_));
        let mut tensor = [[Complex64::new(0.0, 0.0); 3]; 3];
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            for j in i..3 {
                // ⟨Y_2m|n^i n^j⟩ when the final state is the quadrupole
                let angular = angular_moment(m, i, j)?;
                let value = if final_is_quadrupole { angular } else { angular.conj() } * scale;
                tensor[i][j] = value;
                tensor[j][i] = value;
            }
        }
        let trace = tensor[0][0] + tensor[1][1] + tensor[2][2];
        Ok(SecondMomentData {
            overlap: Complex64::new(0.0, 0.0),
            trace,
            tensor,
        })
    }
}

fn spherical_harmonic_2(m: i8, theta: f64, phi: f64) -> Complex64 {
    let (s, c) = (sin(theta), cos(theta));
    match m {
        0 => Complex64::new(sqrt(5.0 / (16.0 * PI)) * (3.0 * c * c - 1.0), 0.0),
        1 | -1 => {
            let amp = sqrt(15.0 / (8.0 * PI)) * s * c;
            let sign = if m == 1 { -1.0 } else { 1.0 };
            Complex64::from_polar(sign * amp, m as f64 * phi)
        }
        _ => Complex64::from_polar(sqrt(15.0 / (32.0 * PI)) * s * s, m as f64 * phi),
    }
}

/// `∫dΩ Y_2m* n^i n^j`.
fn angular_moment(m: i8, i: usize, j: usize) -> Result<Complex64> {
    let unit = |theta: f64, phi: f64| [sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta)];
    let spec = QuadratureSpec::finite(0.0, 2.0 * PI)
        .relative_tolerance(1e-12)
        .absolute_tolerance(1e-13);
    let part = |real: bool| -> Result<f64> {
        let inner = |theta: f64| -> f64 {
            quad_adaptive(
                |phi| {
                    let n = unit(theta, phi);
                    let y = spherical_harmonic_2(m, theta, phi).conj() * (n[i] * n[j]);
                    if real {
                        y.re
                    } else {
                        y.im
                    }
                },
                &spec,
            )
            .unwrap_or(f64::NAN)
                * sin(theta)
        };
        let v = quad_adaptive(
            inner,
            &QuadratureSpec::finite(0.0, PI)
                .relative_tolerance(1e-12)
                .absolute_tolerance(1e-13),
        )?;
        if v.is_nan() {
            return Err(Error::Invalid("angular quadrature failed"));
        }
        Ok(v)
    };
    Ok(Complex64::new(part(true)?, part(false)?))
}

/// Spherical Bessel `j₂(z)`.
fn spherical_j2(z: f64) -> f64 {
    if z.abs() < 1.0 {
        // z² Σ (−z²/2)^k / (k! (2k+5)!!)
        let y = -0.5 * z * z;
        let mut term = z * z / 15.0;
        let mut sum = term;
        for k in 1..30 {
            term *= y / (k as f64 * (2 * k + 5) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let (s, c) = (sin(z), cos(z));
        (3.0 / (z * z * z) - 1.0 / z) * s - 3.0 * c / (z * z)
    }
}

/// `∫₀^∞ r⁴ e^{−r²/b²} j₂(q r/2) dr`.
fn radial_transform(q: f64, b: f64) -> Result<f64> {
    quad_adaptive(
        |r| r.powi(4) * exp(-r * r / (b * b)) * spherical_j2(0.5 * q * r),
        &QuadratureSpec::finite(0.0, 12.0 * b)
            .relative_tolerance(1e-11)
            .absolute_tolerance(1e-14 * b.powi(5)),
    )
}

/// `|Σ_n ⟨f|e^{iq·X_n}|i⟩|²` integrated over the direction of `q`.
fn form_factor_shell(config: &OscillatorOracleConfig, q: f64) -> Result<f64> {
    let c = config.density_coefficient();
    let t = radial_transform(q, config.b)?;
    // two particles, plane-wave expansion 4π i² j₂ Y*Y, ∫dΩ_q |Y_2m|² = 1
    Ok(4.0 * c * c * (4.0 * PI) * (4.0 * PI) * t * t)
}

/// Rate from the full Gaussian kernel `e^{−(X_n − X_m′)²/4a²}`, written as
/// `λ (a²/π)^{3/2} ∫d³q e^{−a²q²} |Σ_n ⟨f|e^{iq·X_n}|i⟩|²` and evaluated by
/// nested radial quadrature.
pub fn excitation_rate_exact(config: &OscillatorOracleConfig, lambda: f64, a: f64) -> Result<f64> {
    check_lambda_a(lambda, a)?;
    let failure = RefCell::new(None);
    let integral = quad_adaptive(
        |q| match form_factor_shell(config, q) {
            Ok(f) => q * q * exp(-a * a * q * q) * f,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &QuadratureSpec::finite(0.0, 12.0 / a).relative_tolerance(1e-11),
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let prefactor = (a * a / PI) * sqrt(a * a / PI);
    Ok(lambda * prefactor * integral)
}

/// RCSL rate from the momentum-shell form: the transition form factor at
/// `|p| = k`, weighted by `λa/(2π³) · k/2`.
pub fn rcsl_rate_momentum_shell(config: &OscillatorOracleConfig, k: f64, lambda: f64, a: f64) -> Result<f64> {
    check_lambda_a(lambda, a)?;
    check_k(k)?;
    Ok(lambda * a / (2.0 * PI * PI * PI) * 0.5 * k * form_factor_shell(config, k)?)
}

/// `sin z / z − 1 + z²/6` without cancellation.
fn sinc_remainder(z: f64) -> f64 {
    if z.abs() < 0.5 {
        let y = -z * z;
        // Σ_{n≥2} (−z²)^n / (2n+1)!
        let mut term = y * y / 120.0;
        let mut sum = term;
        for n in 3..20 {
            term *= y / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        sin(z) / z - 1.0 + z * z / 6.0
    }
}

/// RCSL rate `λaπ⁻² Σ_nm ⟨f|{sin(k|X_n − X_m′|)/|X_n − X_m′| |i⟩⟨i|}|f⟩`
/// by quadrature over both radii and the relative angle. The kernel's
/// constant and `|z|²` parts carry no l = 2 component and are dropped
/// before integrating.
pub fn rcsl_rate_general(config: &OscillatorOracleConfig, k: f64, lambda: f64, a: f64) -> Result<f64> {
    check_lambda_a(lambda, a)?;
    check_k(k)?;
    let b = config.b;
    let c = config.density_coefficient();
    let hi = 9.0 * b;
    let tol = |lo: f64, hi: f64| {
        QuadratureSpec::finite(lo, hi)
            .relative_tolerance(1e-11)
            .absolute_tolerance(0.0)
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let record = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let angular = |r: f64, rp: f64| {
        let floor = 1e-14 * k * sinc_remainder(0.5 * k * (r + rp)).abs();
        quad_adaptive(
            |x| {
                let rho = 0.5 * sqrt((r * r + rp * rp - 2.0 * r * rp * x).max(0.0));
                let p2 = 0.5 * (3.0 * x * x - 1.0);
                k * sinc_remainder(k * rho) * p2
            },
            &QuadratureSpec::finite(-1.0, 1.0)
                .relative_tolerance(1e-11)
                .absolute_tolerance(floor.max(f64::MIN_POSITIVE)),
        )
    };
    let weight = |r: f64| r.powi(4) * exp(-r * r / (b * b));
    let outer = quad_adaptive(
        |r| {
            let inner = quad_adaptive(
                |rp| match angular(r, rp) {
                    Ok(v) => weight(rp) * v,
                    Err(_) => f64::NAN,
                },
                &tol(0.0, hi),
            );
            weight(r) * record(inner)
        },
        &tol(0.0, hi),
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if outer.is_nan() {
        return Err(Error::Invalid("angular quadrature failed"));
    }
    // four (n, m) pairs, 2π from the l = 2 projection
    Ok(lambda * a / (PI * PI) * 4.0 * c * c * 2.0 * PI * outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonFlag {
    Consistent,
    Excluded,
}

impl ComparisonFlag {
    pub fn against_bound(counts_per_kg_day: f64) -> Self {
        if counts_per_kg_day < GE_EMISSION_BOUND {
            ComparisonFlag::Consistent
        } else {
            ComparisonFlag::Excluded
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ComparisonFlag::Consistent => "consistent",
            ComparisonFlag::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationPrediction {
    /// Rate per nucleus, 1/s.
    pub rate_per_nucleus: f64,
    pub counts_per_kg_day: f64,
    pub bound: f64,
    pub flag: ComparisonFlag,
}

impl ExcitationPrediction {
    fn new(nucleus: &NucleusSpec, rate: f64) -> Self {
        let counts = nucleus.counts_per_kg_day(rate);
        Self {
            rate_per_nucleus: rate,
            counts_per_kg_day: counts,
            bound: GE_EMISSION_BOUND,
            flag: ComparisonFlag::against_bound(counts),
        }
    }
}

/// `Γ = (5/2)² λ / [(ak)⁴ α k c τ]` per nucleus.
fn qrcsl_per_nucleus(nucleus: &NucleusSpec, params: &ModelParams, tau: f64) -> f64 {
    let ak = params.a() * nucleus.k;
    6.25 * params.lambda() / (ak * ak * ak * ak * params.alpha_fs() * nucleus.k * params.c() * tau)
}

pub fn quadrupole_rate_qrcsl(nucleus: &NucleusSpec, params: &ModelParams) -> ExcitationPrediction {
    ExcitationPrediction::new(nucleus, qrcsl_per_nucleus(nucleus, params, nucleus.tau))
}

/// `Γ = (5/3π²) λ a / (α c τ)` per nucleus.
pub fn quadrupole_rate_rcsl(nucleus: &NucleusSpec, params: &ModelParams) -> ExcitationPrediction {
    let rate = 5.0 / (3.0 * PI * PI) * params.lambda() * params.a() / (params.alpha_fs() * params.c() * nucleus.tau);
    ExcitationPrediction::new(nucleus, rate)
}

/// The two routes from a quadrupole strength `S` to the QRCSL rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleConsistency {
    /// `(π/15)(λ/a⁴) S`, 1/s.
    pub rate_via_strength: f64,
    /// Lifetime implied by `S` through the E2 decay rate, s.
    pub tau_implied: f64,
    /// `(5/2)² λ / [(ak)⁴ α k c τ_implied]`, 1/s.
    pub rate_via_lifetime: f64,
}

/// `strength` is `Σ_{m,m′} |⟨2⁺,m′|Σ_n X_n² Y_2m|0⁺⟩|²` in cm⁴.
pub fn quadrupole_consistency(
    strength: f64,
    nucleus: &NucleusSpec,
    params: &ModelParams,
) -> Result<QuadrupoleConsistency> {
    if !(strength >= 0.0) || strength.is_infinite() {
        return Err(Error::domain("S", strength, "S >= 0"));
    }
    let a = params.a();
    let rate_via_strength = PI / 15.0 * params.lambda() / (a * a * a * a) * strength;
    let inverse_tau = 4.0 * PI / (3.0 * 125.0) * params.c() * nucleus.k.powi(5) * params.alpha_fs() * strength;
    let tau_implied = 1.0 / inverse_tau;
    Ok(QuadrupoleConsistency {
        rate_via_strength,
        tau_implied,
        rate_via_lifetime: qrcsl_per_nucleus(nucleus, params, tau_implied),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub a: f64,
    pub qrcsl: ExcitationPrediction,
    pub rcsl: ExcitationPrediction,
}

/// Predictions on the grid `lambdas × a_values` (λ outer), other
/// parameters from `base`.
pub fn exclusion_scan(
    lambdas: &[f64],
    a_values: &[f64],
    nucleus: &NucleusSpec,
    base: &ModelParams,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(lambdas.len() * a_values.len());
    for &lambda in lambdas {
        for &a in a_values {
            let params = base.with_lambda(lambda)?.with_a(a)?;
            rows.push(ScanRow {
                lambda,
                a,
                qrcsl: quadrupole_rate_qrcsl(nucleus, &params),
                rcsl: quadrupole_rate_rcsl(nucleus, &params),
            });
        }
    }
    Ok(rows)
}
