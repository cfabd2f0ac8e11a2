use std::f64::consts::PI;

use proptest::prelude::*;
use qrcsl_core::kernels::*;
use qrcsl_core::numerics::quadrature::{quad_adaptive, QuadratureSpec};
use qrcsl_core::ModelParams;
use rand::{Rng, SeedableRng};

const K1_AT_ONE: f64 = 0.601_907_230_197_234_6;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn params_with_mu(mu: f64) -> ModelParams {
    ModelParams::new(1.0, 1.0, mu).unwrap()
}

#[test]
fn commutator_kernel_reference_points() {
    let m = 2.5;
    let v = commutator_kernel(1.0 / m, m).unwrap();
    assert!(rel(v.value, m.powi(3) * K1_AT_ONE / (2.0 * PI * PI)) < 1e-12);
    assert!(rel(v.value / m.powi(3), 0.030494) < 1e-4);
    assert_eq!(v.units, KernelUnits::PerVolume);

    let s = 1e-3 / m;
    let small = commutator_kernel(s, m).unwrap().value;
    assert!(rel(small, m / (2.0 * PI * PI * s * s)) < 1e-2);
}

#[test]
fn commutator_kernel_asymptotics() {
    for &ms in &[10.0, 20.0, 50.0] {
        let (m, s) = (1.0, ms);
        let v = commutator_kernel(s, m).unwrap().value;
        let asym = m * m / (2.0 * PI * PI * s) * (PI / (2.0 * m * s)).sqrt() * (-m * s).exp();
        assert!(rel(v, asym) < 0.05, "Ms = {ms}");
    }
}

#[test]
fn u_k1_integral_is_half_pi() {
    let spec = QuadratureSpec::semi_infinite(0.0).relative_tolerance(1e-12);
    let v = quad_adaptive(
        |u| {
            if u == 0.0 {
                1.0
            } else {
                u * (-u).exp() * qrcsl_core::numerics::k1e(u)
            }
        },
        &spec,
    )
    .unwrap();
    assert!(rel(v, PI / 2.0) < 1e-10);
}

#[test]
fn onshell_closed_form_vs_quadrature() {
    for &mu in &[0.5, 1.0, 10.0, 100.0] {
        let closed = gaussian_onshell_integral(0.0, mu).unwrap();
        let quad = gaussian_onshell_integral_quadrature(0.0, mu).unwrap();
        assert_eq!(closed.method, Method::ClosedForm);
        assert_eq!(quad.method, Method::Quadrature);
        assert!(rel(quad.value, closed.value) < 1e-6, "mu = {mu}");
    }
}

#[test]
fn onshell_boosted_equals_rest() {
    let mu = 1.0;
    let rest = gaussian_onshell_integral_quadrature(0.0, mu).unwrap().value;
    let boosted = gaussian_onshell_integral_quadrature(5.0 * mu, mu).unwrap().value;
    assert!(rel(boosted, rest) < 1e-6);
    let e2k1 = 2.0 * PI * (2.0f64).exp() * 0.139_865_881_816_522_4;
    assert!(rel(rest, e2k1) < 1e-6);
}

#[test]
fn onshell_frame_independence_random_boosts() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for &mu in &[0.5, 1.0, 10.0, 100.0] {
        let closed = gaussian_onshell_integral(0.0, mu).unwrap().value;
        for _ in 0..10 {
            let rapidity: f64 = rng.random_range(0.0..3.0);
            let p1 = mu * rapidity.sinh();
            let v = gaussian_onshell_integral_quadrature(p1, mu).unwrap().value;
            assert!(rel(v, closed) < 1e-6, "mu = {mu}, p1 = {p1}");
        }
    }
}

#[test]
fn onshell_large_mu_limit() {
    let mu = 1e3;
    let bracket = gaussian_onshell_integral(0.0, mu).unwrap().value / (2.0 * PI);
    assert!(rel(bracket, PI.sqrt() / (2.0 * mu)) < 1e-4);
}

#[test]
fn nomeasure_closed_form_vs_quadrature() {
    for &mu in &[0.5, 1.0, 10.0, 100.0] {
        for &e1 in &[1.0, 3.0] {
            let closed = gaussian_nomeasure_integral(e1, mu).unwrap().value;
            let quad = gaussian_nomeasure_integral_quadrature(e1, mu).unwrap().value;
            assert!(rel(quad, closed) < 1e-6, "mu = {mu}, E1 = {e1}");
        }
    }
    // E1 = M, mu = 1: 2π e²[K0(2) + K1(2)]
    let v = gaussian_nomeasure_integral(1.0, 1.0).unwrap().value;
    let expected = 2.0 * PI * (2.0f64).exp() * (0.113_893_872_749_533_4 + 0.139_865_881_816_522_4);
    assert!(rel(v, expected) < 1e-12);
}

#[test]
fn nomeasure_proportional_to_energy() {
    let one = gaussian_nomeasure_integral_quadrature(1.0, 1.0).unwrap().value;
    let three = gaussian_nomeasure_integral_quadrature(3.0, 1.0).unwrap().value;
    assert!(rel(three / one, 3.0) < 1e-6);
}

#[test]
fn nomeasure_bracket_large_mu() {
    for &mu in &[10.0, 100.0, 1e3] {
        let lead = (PI / (4.0 * mu * mu)).sqrt();
        assert!(rel(nomeasure_bracket(mu), lead) < 2.0 / (mu * mu));
    }
}

#[test]
fn nomeasure_rejects_off_shell() {
    assert!(gaussian_nomeasure_integral(0.5, 1.0).is_err());
    assert!(gaussian_nomeasure_integral(1.0, 0.0).is_err());
}

#[test]
fn fourier_kernel_reference_and_quadrature() {
    let m = 1.7;
    let v = fourier_onshell_kernel(1.0 / m, m).unwrap();
    assert!(rel(v.value, 4.0 * PI * m * m * K1_AT_ONE) < 1e-12);
    for &(mr, mass) in &[(3.0, 1.0), (3.0, 0.5), (1.0, 1.0), (0.2, 2.0)] {
        let r = mr / mass;
        let closed = fourier_onshell_kernel(r, mass).unwrap().value;
        let quad = fourier_onshell_kernel_quadrature(r, mass).unwrap().value;
        assert!(rel(quad, closed) < 1e-6, "Mr = {mr}: {quad} vs {closed}");
    }
    assert!(fourier_onshell_kernel(0.0, 1.0).is_err());
}

#[test]
fn fourier_kernel_volume_normalization() {
    for &m in &[0.5, 1.0, 3.0] {
        let v = fourier_kernel_volume_integral(m).unwrap();
        assert!(rel(v, 2.0 * PI * PI / (m * m)) < 1e-6);
    }
}

#[test]
fn profile_quadrature_monotone_and_suppressed() {
    let mu = 10.0;
    let mut prev = f64::INFINITY;
    for &d in &[0.0, 1.0, 2.0, 4.0, 8.0] {
        let v = smeared_commutator_profile_quadrature(d, mu).unwrap();
        assert!(v < prev, "d = {d}");
        prev = v;
    }
    assert!(smeared_commutator_profile_quadrature(10.0, mu).unwrap() < 1e-4);
}

#[test]
fn profile_monte_carlo_matches_quadrature() {
    let params = params_with_mu(10.0);
    let zero = smeared_commutator_profile(0.0, &params, 20_000, 5).unwrap();
    assert_eq!(zero.ratio.mean, 1.0);
    for &d in &[1.0, 2.0, 4.0] {
        let mc = smeared_commutator_profile(d, &params, 200_000, 5).unwrap();
        let quad = smeared_commutator_profile_quadrature(d, 10.0).unwrap();
        assert!(!mc.low_confidence);
        assert!(
            (mc.ratio.mean - quad).abs() < 4.0 * mc.ratio.std_error,
            "d = {d}: {} ± {} vs {quad}",
            mc.ratio.mean,
            mc.ratio.std_error
        );
    }
    let far = smeared_commutator_profile(10.0, &params, 50_000, 9).unwrap();
    assert!(far.ratio.mean < 1e-4);
}

#[test]
fn raw_smeared_kernel_mc_matches_quadrature() {
    let mu = 10.0;
    let sampler = commutator_profile_sampler(0.0, mu).unwrap();
    let est = qrcsl_core::numerics::mc_integrate(sampler, 200_000, 1).unwrap();
    let quad = smeared_commutator_quadrature(0.0, mu).unwrap();
    assert!((est.mean - quad).abs() < 4.0 * est.std_error);
}

proptest! {
    #[test]
    fn spacelike_exponent_nonnegative(p1 in 0.0f64..50.0, p2 in 0.0f64..50.0, mu in 0.1f64..100.0) {
        let q = onshell_half_interval(p1, p2, mu);
        prop_assert!(q >= 0.0);
        if p1 != p2 {
            prop_assert!(q > 0.0);
        }
    }

    #[test]
    fn commutator_kernel_positive(s in 1e-3f64..50.0, m in 0.1f64..10.0) {
        prop_assert!(commutator_kernel(s, m).unwrap().value > 0.0);
    }
}
