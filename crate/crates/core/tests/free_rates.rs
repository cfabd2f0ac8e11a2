use proptest::prelude::*;
use qrcsl_core::free_rates::*;
use qrcsl_core::kernels::Method;
use qrcsl_core::ModelParams;
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Parameters with GRW λ and a and the mass chosen to give `mu`.
fn params(mu: f64) -> ModelParams {
    let base = ModelParams::grw();
    base.with_mass(mu / base.a()).unwrap()
}

fn standard_state() -> TwoPacketState {
    TwoPacketState::new(10.0, 0.5, 0.5).unwrap()
}

#[test]
fn rate_approaches_lambda_at_large_mu() {
    let r = collapse_decay_rate(&standard_state(), &params(1e3)).unwrap();
    assert!((r.value_dimensionless - 1.0).abs() < 0.01, "{}", r.value_dimensionless);
    assert!(!r.regime_warning);
    let r = collapse_decay_rate(&standard_state(), &params(1e2)).unwrap();
    assert!((r.value_dimensionless - 1.0).abs() < 0.1);
}

#[test]
fn rate_below_lambda_at_unit_mu() {
    let r = collapse_decay_rate(&standard_state(), &params(1.0)).unwrap();
    assert!(r.value_dimensionless < 1.0);
    assert!(r.regime_warning);
}

#[test]
fn physical_rate_linear_in_lambda() {
    let p = params(10.0);
    let doubled = p.with_lambda(2.0 * p.lambda()).unwrap();
    let one = collapse_decay_rate(&standard_state(), &p).unwrap();
    let two = collapse_decay_rate(&standard_state(), &doubled).unwrap();
    assert_eq!(one.value_dimensionless, two.value_dimensionless);
    assert_eq!(two.value_physical, 2.0 * one.value_physical);
    assert_eq!(one.value_physical, one.value_dimensionless * p.rate_conversion());
}

#[test]
fn position_and_momentum_routes_agree() {
    for &mu in &[0.5, 1.0, 10.0, 100.0, 1e3] {
        for &(d, w, wl) in &[(10.0, 0.5, 0.5), (12.0, 1.0, 0.2), (10.0, 0.5, 0.9)] {
            let state = TwoPacketState::new(d, w, wl).unwrap();
            let x = collapse_rate_dimensionless(&state, mu).unwrap();
            let p = collapse_rate_momentum_space(&state, mu).unwrap();
            assert!(rel(x, p) < 1e-7, "mu = {mu}, d = {d}: {x} vs {p}");
        }
    }
}

#[test]
fn deviation_is_second_order_in_inverse_mu() {
    let state = standard_state();
    let dev = |mu: f64| 1.0 - collapse_rate_dimensionless(&state, mu).unwrap();
    // packet curvature lowers the rate by 3/(4σ²μ²); the prefactor raises it by 3/(16μ²)
    let coefficient = 3.0 / (4.0 * 0.25) - 3.0 / 16.0;
    for &mu in &[100.0, 1e3] {
        assert!(rel(dev(mu) * mu * mu, coefficient) < 0.02, "mu = {mu}");
    }
}

#[test]
fn coherence_requires_both_packets() {
    let p = params(10.0);
    let only_left = TwoPacketState::new(10.0, 0.5, 1.0).unwrap();
    assert!(collapse_decay_rate(&only_left, &p).is_err());
    let overlapping = TwoPacketState::new(2.0, 0.5, 0.5).unwrap();
    assert!(collapse_decay_rate(&overlapping, &p).is_err());
}

#[test]
fn cross_term_bound_examples() {
    let far = cross_term_bound(&standard_state()).unwrap();
    assert!(far < 1e-10);
    assert!(rel(far, (-25.0f64).exp()) < 1e-8);
    let same = cross_term_bound(&TwoPacketState::new(0.0, 0.5, 0.5).unwrap()).unwrap();
    assert!(rel(same, 1.0) < 1e-10);
    let mut prev = f64::INFINITY;
    for &d in &[2.0, 4.0, 6.0, 8.0, 10.0] {
        let v = cross_term_bound(&TwoPacketState::new(d, 0.5, 0.5).unwrap()).unwrap();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn energy_rate_reference_values() {
    let g1 = energy_rate_dimensionless(1.0).unwrap();
    assert!((g1 - 0.9497).abs() < 1e-3);
    let mu = 1e3;
    let g = energy_rate_dimensionless(mu).unwrap();
    assert!(rel(g, 0.75 / (mu * mu)) < 1e-5);
}

#[test]
fn energy_rate_positive_and_monotone_approach() {
    for &mu in &[0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e3] {
        assert!(energy_rate_dimensionless(mu).unwrap() > 0.0);
    }
    let mut prev = f64::INFINITY;
    for k in 0..=40 {
        let mu = 10f64.powf(1.0 + 5.0 * k as f64 / 40.0);
        let ratio = energy_rate_dimensionless(mu).unwrap() / energy_rate_asymptote(mu);
        assert!((1.0..=1.01).contains(&ratio), "mu = {mu}: {ratio}");
        assert!(ratio < prev);
        prev = ratio;
    }
}

#[test]
fn energy_rate_linear_in_particle_count() {
    let p = params(3.0);
    let one = energy_rate_exact(&p, 1.0).unwrap();
    let seven = energy_rate_exact(&p, 7.0).unwrap();
    assert_eq!(seven.value_physical, 7.0 * one.value_physical);
    assert_eq!(seven.value_dimensionless, one.value_dimensionless);
    assert!(energy_rate_exact(&p, 0.0).is_err());
}

#[test]
fn direct_energy_rate_matches_exact() {
    let p = params(1.0);
    let exact = energy_rate_exact(&p, 1.0).unwrap().value_dimensionless;
    let narrow = MomentumDistribution::point(0.0, 1.0).unwrap();
    for method in [Method::ClosedForm, Method::Quadrature] {
        let d = energy_rate_direct(&narrow, &p, method).unwrap();
        assert!(rel(d.value_dimensionless, exact) < 1e-6);
    }
    // thermal-like: weights ∝ p² e^{−E/T}
    let momenta: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
    let raw: Vec<f64> = momenta
        .iter()
        .map(|p: &f64| p * p * (-(p * p + 1.0).sqrt() / 0.7).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let thermal = MomentumDistribution::new(momenta, weights).unwrap();
    let d = energy_rate_direct(&thermal, &p, Method::Quadrature).unwrap();
    assert!(rel(d.value_dimensionless, exact) < 1e-6);
}

#[test]
fn direct_energy_rate_distribution_independent() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let p = params(2.0);
    let mut values = Vec::new();
    for _ in 0..5 {
        let momenta: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..10.0)).collect();
        let raw: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| 3.0 * w / total).collect();
        let dist = MomentumDistribution::new(momenta, weights).unwrap();
        values.push(
            energy_rate_direct(&dist, &p, Method::Quadrature)
                .unwrap()
                .value_dimensionless,
        );
    }
    for v in &values {
        assert!(rel(*v, values[0]) < 1e-6);
    }
}

#[test]
fn zero_weight_distribution_rejected() {
    assert!(MomentumDistribution::new(vec![0.5], vec![0.0]).is_err());
}

#[test]
fn physical_energy_conversion() {
    let p = ModelParams::grw();
    let r = energy_rate_exact(&p, 1.0).unwrap();
    // λ ħc M · 3/(4μ²) = 3 λ ħc / (4 M a²) at μ ≈ 4.75e8
    let asym = 3.0 * p.lambda() * qrcsl_core::constants::HBAR_C_ERG_CM / (4.0 * p.mass() * p.a() * p.a());
    assert!(rel(r.value_physical, asym) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn rate_between_zero_and_one(mu in 0.5f64..200.0, wl in 0.05f64..0.95) {
        let state = TwoPacketState::new(10.0, 0.5, wl).unwrap();
        let r = collapse_rate_dimensionless(&state, mu).unwrap();
        prop_assert!(r > 0.0 && r < 1.0);
    }
}
