//! Acceptance run: one line per criterion, nonzero exit on any failure not
//! listed in `EXPECTED_FAILURES`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use qrcsl_core::excitation::{
    excitation_rate_exact, excitation_rate_series, quadrupole_consistency, quadrupole_rate_qrcsl, quadrupole_rate_rcsl,
    rcsl_rate_general, rcsl_rate_momentum_shell, rcsl_rate_series, ComparisonFlag, NucleusSpec, OscillatorOracleConfig,
};
use qrcsl_core::free_rates::{
    collapse_decay_rate, collapse_rate_dimensionless, cross_term_bound, energy_rate_dimensionless, energy_rate_direct,
    MomentumDistribution, TwoPacketState,
};
use qrcsl_core::kernels::{
    commutator_profile_sampler, fourier_kernel_volume_integral, fourier_onshell_kernel,
    fourier_onshell_kernel_quadrature, gaussian_nomeasure_integral, gaussian_nomeasure_integral_quadrature,
    gaussian_onshell_integral, gaussian_onshell_integral_quadrature, profile_ratio,
    smeared_commutator_profile_quadrature, Method,
};
use qrcsl_core::numerics::montecarlo::stream_rng;
use qrcsl_core::trajectories::{
    build_collapse_operators, master_evolve, offdiagonal_decay_rate, CollapseOperatorSet, DensityMatrixGrid,
    EnsembleConfig, Grid1D, NoiseScheme, OperatorSpec, StateVector,
};
use qrcsl_core::ModelParams;
use qrcsl_lab::config::{parse_config, Format};
use qrcsl_lab::execute;
use qrcsl_lab::parallel::{mc_integrate_par, run_ensemble_par};

type Outcome = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

/// Criteria known to fail, with the measured reason.
const EXPECTED_FAILURES: &[(u32, &str)] = &[(
    3,
    "for Gaussian packets the rate deviation is second order in 1/mu, so dev(1e2)/dev(1e3) is ~100 rather than ~10",
)];

const MUS: [f64; 4] = [0.5, 1.0, 10.0, 100.0];

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

fn q<T>(r: qrcsl_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn params_with_mu(mu: f64) -> ModelParams {
    let base = ModelParams::grw();
    base.with_mass(mu / base.a()).expect("positive mass")
}

fn kernel_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for &mu in &MUS {
        let closed = q(gaussian_onshell_integral(0.0, mu))?.value;
        worst = worst.max(rel(q(gaussian_onshell_integral_quadrature(0.0, mu))?.value, closed));
        for e1 in [1.0, 3.0] {
            let closed = q(gaussian_nomeasure_integral(e1, mu))?.value;
            worst = worst.max(rel(q(gaussian_nomeasure_integral_quadrature(e1, mu))?.value, closed));
        }
        for r in [0.5 / mu, 1.0 / mu, 3.0 / mu] {
            let closed = q(fourier_onshell_kernel(r, mu))?.value;
            worst = worst.max(rel(q(fourier_onshell_kernel_quadrature(r, mu))?.value, closed));
        }
    }
    let mut rng = stream_rng(17, 0);
    let mut boost_worst: f64 = 0.0;
    for &mu in &MUS {
        let rest = q(gaussian_onshell_integral(0.0, mu))?.value;
        for _ in 0..10 {
            let rapidity: f64 = rng.random_range(0.0..3.0);
            let boosted = q(gaussian_onshell_integral_quadrature(mu * rapidity.sinh(), mu))?.value;
            boost_worst = boost_worst.max(rel(boosted, rest));
        }
    }
    Ok((
        worst < 1e-6 && boost_worst < 1e-6,
        format!("closed form vs quadrature {worst:.2e}, 10 boosts per mu {boost_worst:.2e} (tol 1e-6)"),
    ))
}

fn delta_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for &m in &MUS {
        worst = worst.max(rel(q(fourier_kernel_volume_integral(m))?, 2.0 * PI * PI / (m * m)));
    }
    Ok((worst < 1e-6, format!("worst relative error {worst:.2e} (tol 1e-6)")))
}

fn collapse_rate_limit() -> Outcome {
    let state = q(TwoPacketState::new(10.0, 0.5, 0.5))?;
    let dev = |mu: f64| -> Result<f64, String> {
        Ok(1.0 - q(collapse_decay_rate(&state, &params_with_mu(mu)))?.value_dimensionless)
    };
    let (d3, d2) = (dev(1e3)?, dev(1e2)?);
    let slope = (d3.abs() / d2.abs()).ln() / 10f64.ln();
    let cross = q(cross_term_bound(&state))?;
    let magnitudes = d3.abs() < 0.01 && d2.abs() < 0.1;
    let scaling = (slope + 1.0).abs() < 0.2;
    let pass = magnitudes && scaling && cross < 1e-10;
    Ok((
        pass,
        format!(
            "dev(1e3) {d3:.3e} (<1%), dev(1e2) {d2:.3e} (<10%), log-log slope {slope:.3} (want -1 +/- 0.2), cross term {cross:.2e} (<1e-10)"
        ),
    ))
}

/// Allowance for floating-point rounding in an exact inequality.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

fn energy_rate_asymptote() -> Outcome {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..=70 {
        let mu = 10f64.powf(1.0 + k as f64 / 10.0);
        let ratio = q(energy_rate_dimensionless(mu))? * 4.0 * mu * mu / 3.0;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let mu = 2.0;
    let params = params_with_mu(mu);
    let exact = q(energy_rate_dimensionless(mu))?;
    let mut rng = stream_rng(99, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let momenta: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..10.0)).collect();
        let weights: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let dist = q(MomentumDistribution::new(momenta, weights))?;
        let g = q(energy_rate_direct(&dist, &params, Method::Quadrature))?.value_dimensionless;
        worst = worst.max(rel(g, exact));
    }
    // past mu ~ 1e7 the exact excess 3/(16 mu^2) is below one ulp, so the
    // lower bound is checked to rounding
    Ok((
        lo >= 1.0 - ROUNDING && hi <= 1.01 && worst < 1e-6,
        format!(
            "g*4mu^2/3 in [1 - {:.1e}, {hi:.6}] for mu in [10, 1e8]; 5 distributions {worst:.2e} (tol 1e-6)",
            1.0 - lo
        ),
    ))
}

const N: usize = 64;
const DX: f64 = 0.5;
const DT: f64 = 0.05;

fn grid() -> Grid1D {
    Grid1D::new(N, DX, DT).expect("valid grid")
}

fn csl() -> Result<CollapseOperatorSet, String> {
    q(build_collapse_operators(&grid(), OperatorSpec::csl()))
}

fn packets(weight_left: f64) -> Result<TwoPacketState, String> {
    q(TwoPacketState::new(10.0, 0.5, weight_left))
}

fn ensemble(n_traj: u64, t_final: f64, seed: u64) -> EnsembleConfig {
    EnsembleConfig {
        n_traj,
        t_final,
        scheme: NoiseScheme::Cooked,
        seed,
        checkpoints: 8,
        kinetic: 0.0,
    }
}

fn csl_profile(d: f64) -> f64 {
    (-0.5 * d * d).exp() / PI.powf(0.25)
}

fn stochastic_dynamics() -> Outcome {
    let ops = csl()?;
    let g = grid();
    let mut notes = Vec::new();

    let mut born = true;
    for (k, &w) in [0.2, 0.5, 0.8].iter().enumerate() {
        let psi = q(StateVector::two_packet(&g, &packets(w)?))?;
        let stats = q(run_ensemble_par(&psi, &ops, &ensemble(1000, 10.0, 100 + k as u64)))?;
        let sigma = (w * (1.0 - w) / stats.n_traj as f64).sqrt();
        born &= (stats.left_fraction - w).abs() < 3.0 * sigma && !stats.flagged;
        notes.push(format!("P_L({w})={:.4}", stats.left_fraction));
    }

    let psi = q(StateVector::two_packet(&g, &packets(0.5)?))?;
    let master = q(master_evolve(&DensityMatrixGrid::pure(&psi), &ops, 1.0))?;
    let ns = [100u64, 1000, 10_000];
    let mut residuals = Vec::new();
    for &n in &ns {
        let stats = q(run_ensemble_par(&psi, &ops, &ensemble(n, 1.0, 21)))?;
        residuals.push(stats.mean_density.operator_distance(&master));
    }
    let slope = (residuals[2] / residuals[0]).ln() / (ns[2] as f64 / ns[0] as f64).ln();
    let converges = residuals[0] > residuals[1] && residuals[1] > residuals[2] && (slope + 0.5).abs() < 0.2;
    notes.push(format!("residual slope {slope:.3}"));

    let single = q(StateVector::gaussian_packet(&g, 0.0, 1.0))?;
    let stats = q(run_ensemble_par(&single, &ops, &ensemble(1000, 2.0, 11)))?;
    let worst_z = stats
        .martingale
        .iter()
        .map(|p| {
            if p.std_error > 0.0 {
                (p.mean - 1.0).abs() / p.std_error
            } else {
                (p.mean - 1.0).abs() / 1e-15
            }
        })
        .fold(0.0f64, f64::max);
    let martingale = worst_z <= 3.0;
    notes.push(format!("martingale max |z| {worst_z:.2}"));

    let rho0 = DensityMatrixGrid::pure(&q(StateVector::two_packet(&g, &packets(0.3)?))?);
    let t = 2.0;
    let rho = q(master_evolve(&rho0, &ops, t))?;
    let mut worst: f64 = 0.0;
    let scale = rho0.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for j in 0..N {
        for k in 0..N {
            let rate: f64 = (0..N)
                .map(|i| {
                    let a = csl_profile(g.min_image(g.position(j), g.position(i)));
                    let b = csl_profile(g.min_image(g.position(k), g.position(i)));
                    DX * (a - b) * (a - b)
                })
                .sum();
            let exact = rho0.matrix()[(j, k)] * (-0.5 * t * rate).exp();
            if exact.norm() > 1e-6 * scale {
                worst = worst.max((rho.matrix()[(j, k)] - exact).norm() / exact.norm());
            }
        }
    }
    let closed_form = worst < 1e-6;
    notes.push(format!("closed-form decay {worst:.2e}"));

    Ok((born && converges && martingale && closed_form, notes.join(", ")))
}

fn operator_limit() -> Outcome {
    let g = grid();
    let c = csl()?;
    let large = q(build_collapse_operators(&g, OperatorSpec::qrcsl(1e3, 10.0)))?;
    let unit = q(build_collapse_operators(&g, OperatorSpec::qrcsl(1.0, 10.0)))?;
    let mut worst: f64 = 0.0;
    for site in 0..N {
        worst = worst.max((large.operator(site) - c.operator(site)).camax());
    }
    let state = packets(0.5)?;
    let rc = q(offdiagonal_decay_rate(&state, &c, 1.0))?;
    let rl = q(offdiagonal_decay_rate(&state, &large, 1.0))?;
    let ru = q(offdiagonal_decay_rate(&state, &unit, 1.0))?;
    let quad_unit = q(collapse_rate_dimensionless(&state, 1.0))?;
    let quad_large = q(collapse_rate_dimensionless(&state, 1e3))?;
    let pass = worst < 1e-4 && rel(rl, rc) < 0.01 && ru < rc * 0.99 && quad_unit < quad_large;
    Ok((
        pass,
        format!(
            "entrywise {worst:.2e} (<1e-4), decay csl {rc:.6} qrcsl(1e3) {rl:.6} qrcsl(1) {ru:.4}; quadrature mu=1 {quad_unit:.4} < mu=1e3 {quad_large:.6}"
        ),
    ))
}

fn excitation_series() -> Outcome {
    let bs = [0.01, 0.03, 0.1];
    let mut devs = Vec::new();
    for &b in &bs {
        let cfg = q(OscillatorOracleConfig::ground_to_quadrupole(b))?;
        let exact = q(excitation_rate_exact(&cfg, 1.0, 1.0))?;
        let series = q(excitation_rate_series(&q(cfg.second_moments())?, 1.0, 1.0))?;
        devs.push(rel(exact, series));
    }
    let slope = (devs[2] / devs[0]).ln() / (bs[2] / bs[0]).ln();
    Ok((
        devs[0] < 1e-4 && (slope - 2.0).abs() < 0.2,
        format!(
            "deviation at b/a=1e-2 {:.3e} (<1e-4), slope {slope:.3} (2 +/- 0.2)",
            devs[0]
        ),
    ))
}

fn ge_predictions() -> Outcome {
    let grw = ModelParams::grw();
    let ge = NucleusSpec::ge74();
    let qr = quadrupole_rate_qrcsl(&ge, &grw);
    let rc = quadrupole_rate_rcsl(&ge, &grw);
    let within = |x: f64, target: f64| x / target < 5.0 && target / x < 5.0;
    let pass = within(qr.counts_per_kg_day, 5e-16)
        && within(rc.counts_per_kg_day, 5e10)
        && qr.flag == ComparisonFlag::Consistent
        && rc.flag == ComparisonFlag::Excluded;
    Ok((
        pass,
        format!(
            "QRCSL {:.4e} ({}), RCSL {:.4e} ({}) counts/kg/day at {:.1e} nuclei/kg",
            qr.counts_per_kg_day,
            qr.flag.as_str(),
            rc.counts_per_kg_day,
            rc.flag.as_str(),
            ge.nuclei_per_kg
        ),
    ))
}

fn rcsl_appendix() -> Outcome {
    let cfg = q(OscillatorOracleConfig::ground_to_quadrupole(0.3))?;
    let sinc = q(rcsl_rate_general(&cfg, 1.0, 1.0, 1.0))?;
    let shell = q(rcsl_rate_momentum_shell(&cfg, 1.0, 1.0, 1.0))?;
    let forms = rel(sinc, shell);

    let small = q(OscillatorOracleConfig::ground_to_quadrupole(0.01))?;
    let general = q(rcsl_rate_general(&small, 1.0, 1.0, 1.0))?;
    let series = q(rcsl_rate_series(&q(small.second_moments())?, 1.0, 1.0, 1.0))?;
    let series_dev = rel(series, general);

    let grw = ModelParams::grw();
    let ge = NucleusSpec::ge74();
    let mut identity: f64 = 0.0;
    for s in [1e-52, 3.7e-50, 2e-48] {
        let c = q(quadrupole_consistency(s, &ge, &grw))?;
        identity = identity.max(rel(c.rate_via_lifetime, c.rate_via_strength));
    }
    Ok((
        forms < 1e-6 && series_dev < 1e-4 && identity < 1e-12,
        format!("shell vs sinc {forms:.2e} (1e-6), series at kb=1e-2 {series_dev:.2e} (1e-4), identity {identity:.2e} (1e-12)"),
    ))
}

fn quasilocality_profile() -> Outcome {
    let mu = 10.0;
    let samples = 200_000;
    let seed = 5;
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for d in [0.0, 1.0, 2.0, 4.0, 8.0] {
        let v = q(smeared_commutator_profile_quadrature(d, mu))?;
        monotone &= v < previous;
        previous = v;
    }
    let far = q(smeared_commutator_profile_quadrature(10.0, mu))?;
    let at_zero = q(mc_integrate_par(q(commutator_profile_sampler(0.0, mu))?, samples, seed))?;
    let mut worst_z: f64 = 0.0;
    for d in [1.0, 2.0, 4.0, 8.0, 10.0] {
        let at_d = q(mc_integrate_par(q(commutator_profile_sampler(d, mu))?, samples, seed))?;
        let est = profile_ratio(&at_d, &at_zero, false);
        let quad = q(smeared_commutator_profile_quadrature(d, mu))?;
        worst_z = worst_z.max((est.ratio.mean - quad).abs() / est.ratio.std_error);
    }
    Ok((
        monotone && far < 1e-4 && worst_z < 3.0,
        format!("monotone {monotone}, profile(10a) {far:.2e} (<1e-4), MC vs quadrature max |z| {worst_z:.2} (<3)"),
    ))
}

fn reproducibility() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for sub in ["excitation", "energy-rate", "collapse-rate", "scan"] {
        let config = parse_config(&format!("subcommand = {sub}\n")).map_err(|e| format!("{e:?}"))?;
        let a = execute(&config, Some(1)).map_err(|e| e.to_string())?.envelope;
        let b = execute(&config, Some(4)).map_err(|e| e.to_string())?.envelope;
        let same = a.render(Format::Json) == b.render(Format::Json) && a.render(Format::Csv) == b.render(Format::Csv);
        pass &= same;
        if !same {
            notes.push(format!("{sub} differs"));
        }
    }
    let mc = [
        "subcommand = kernels\nseed = 3\n[kernels]\nmu = 1\nseparations = 0, 1, 2 a\nsamples = 50000\n",
        "subcommand = simulate\nseed = 4\n[ensemble]\nn_traj = 300\nt_final = 1 /lambda\n",
    ];
    for text in mc {
        let config = parse_config(text).map_err(|e| format!("{e:?}"))?;
        let serial = execute(&config, Some(1)).map_err(|e| e.to_string())?.envelope;
        let parallel = execute(&config, Some(4)).map_err(|e| e.to_string())?.envelope;
        let same = serial.render(Format::Json) == parallel.render(Format::Json);
        pass &= same;
        if !same {
            notes.push(format!("{} depends on thread count", config.subcommand));
        }
    }
    if notes.is_empty() {
        notes.push(
            "4 deterministic subcommands byte-identical; kernels and simulate identical at 1 and 4 threads".into(),
        );
    }
    Ok((pass, notes.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "kernel oracles", kernel_oracles),
        (2, "delta normalization", delta_normalization),
        (3, "collapse-rate limit", collapse_rate_limit),
        (4, "energy-rate asymptote", energy_rate_asymptote),
        (5, "stochastic dynamics", stochastic_dynamics),
        (6, "QRCSL to CSL operator limit", operator_limit),
        (7, "excitation series", excitation_series),
        (8, "Ge-74 predictions", ge_predictions),
        (9, "RCSL forms and consistency", rcsl_appendix),
        (10, "quasilocality profile", quasilocality_profile),
        (11, "reproducibility", reproducibility),
    ];
    let mut unexpected = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let expected = EXPECTED_FAILURES.iter().find(|(i, _)| *i == id).map(|(_, why)| *why);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let secs = start.elapsed().as_secs_f64();
        match (pass, expected) {
            (false, Some(why)) => {
                println!("criterion {id:>2} {verdict} {title}: {detail} [{secs:.1}s] (expected: {why})")
            }
            (true, Some(_)) => {
                unexpected += 1;
                println!("criterion {id:>2} {verdict} {title}: {detail} [{secs:.1}s] (listed as an expected failure)");
            }
            (p, None) => {
                if !p {
                    unexpected += 1;
                }
                println!("criterion {id:>2} {verdict} {title}: {detail} [{secs:.1}s]");
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected result(s)");
        std::process::exit(1);
    }
}
