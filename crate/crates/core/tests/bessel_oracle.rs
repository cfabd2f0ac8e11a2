//! Scaled Bessel functions against an independent oracle.
//!
//! The oracle evaluates e^z K_ν(z) = ∫₀^∞ exp(−z(cosh t − 1)) cosh(νt) dt
//! (cosh t − 1 written as 2 sinh²(t/2)) with the trapezoid rule, which converges exponentially for this analytic,
//! double-exponentially decaying integrand. Above z = 50 a fixed 12-term
//! asymptotic series is used as a second, algebraically distinct check.

use std::f64::consts::PI;

use proptest::prelude::*;
use qrcsl_core::numerics::bessel::{bessel_k_scaled, k01e, k0e, k1e, BesselOrder};
use qrcsl_core::Error;

fn oracle_integral(nu: u32, z: f64) -> f64 {
    let sigma = (1.0 / z.sqrt()).min(1.0);
    let h = sigma / 8.0;
    let mut sum = 0.5;
    let mut k = 1u64;
    loop {
        let t = k as f64 * h;
        let half = (0.5 * t).sinh();
        let expo = 2.0 * z * half * half;
        if expo > 745.0 {
            break;
        }
        sum += (-expo).exp() * (nu as f64 * t).cosh();
        k += 1;
    }
    sum * h
}

fn oracle_asymptotic(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=12 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * z);
        sum += term;
    }
    (PI / (2.0 * z)).sqrt() * sum
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn matches_integral_oracle_over_full_range() {
    let n = 400;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let z = 10f64.powf(-3.0 + 11.0 * i as f64 / n as f64);
        let (k0, k1) = k01e(z);
        worst = worst.max(rel(k0, oracle_integral(0, z)));
        worst = worst.max(rel(k1, oracle_integral(1, z)));
    }
    assert!(worst < 1e-10, "worst relative error {worst:e}");
}

#[test]
fn matches_asymptotic_oracle_at_large_argument() {
    for &z in &[50.0, 80.0, 300.0, 1e4, 1e6, 1e8, 1e12, 2e18] {
        assert!(rel(k0e(z), oracle_asymptotic(0, z)) < 1e-12, "K0 at {z}");
        assert!(rel(k1e(z), oracle_asymptotic(1, z)) < 1e-12, "K1 at {z}");
    }
}

#[test]
fn frozen_reference_values() {
    let v = bessel_k_scaled(BesselOrder::One, 1.0).unwrap();
    assert!(rel(v.value, 1.636_153_486_263_258) < 1e-12);
    assert!((v.value - 1.63615).abs() < 1e-5);
    let v = bessel_k_scaled(BesselOrder::Zero, 2.0).unwrap();
    assert!(rel(v.value, 0.841_568_215_070_771_4) < 1e-12);
    // both frozen values also follow from the oracle
    assert!(rel(oracle_integral(1, 1.0), 1.636_153_486_263_258) < 1e-12);
    assert!(rel(oracle_integral(0, 2.0), 0.841_568_215_070_771_4) < 1e-12);
}

#[test]
fn million_argument_two_term_form() {
    let z = 1e6;
    let v = bessel_k_scaled(BesselOrder::One, z).unwrap().value;
    let approx = (PI / (2.0 * z)).sqrt() * (1.0 + 3.0 / (8.0 * z));
    assert!(rel(v, approx) < 1e-6);
}

#[test]
fn nonpositive_arguments_are_domain_errors() {
    for z in [0.0, -1.0, -1e-300] {
        assert!(matches!(
            bessel_k_scaled(BesselOrder::Zero, z),
            Err(Error::Domain { .. })
        ));
    }
}

#[test]
fn k1_is_minus_derivative_of_k0() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    for _ in 0..1000 {
        let z: f64 = rng.random_range(0.01..100.0);
        let k0 = |x: f64| (-x).exp() * k0e(x);
        let h = 1e-3 * z.min(1.0);
        let derivative = (k0(z + h) - k0(z - h)) / (2.0 * h);
        let k1 = (-z).exp() * k1e(z);
        assert!(rel(-derivative, k1) < 1e-6, "z = {z}");
    }
}

#[test]
fn k1_scaled_strictly_decreasing() {
    let mut prev = f64::INFINITY;
    for i in 0..2000 {
        let z = 10f64.powf(-3.0 + 12.0 * i as f64 / 2000.0);
        let v = k1e(z);
        assert!(v < prev, "not decreasing at {z}");
        prev = v;
    }
}

proptest! {
    #[test]
    fn positive_and_ordered(z in 1e-3f64..1e9) {
        let (k0, k1) = k01e(z);
        prop_assert!(k0 > 0.0);
        prop_assert!(k0 < k1);
    }

    #[test]
    fn two_term_asymptotics_beyond_ten(z in 10.0f64..1e12) {
        let lead = (PI / (2.0 * z)).sqrt();
        prop_assert!(rel(k0e(z), lead * (1.0 - 1.0 / (8.0 * z))) < 1e-2);
        prop_assert!(rel(k1e(z), lead * (1.0 + 3.0 / (8.0 * z))) < 1e-2);
    }
}
