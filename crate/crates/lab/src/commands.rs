//! One function per subcommand. Each returns records plus a plot-ready
//! table; `run` wraps them in an envelope.

use rayon::prelude::*;

use qrcsl_core::constants::GE_EMISSION_BOUND;
use qrcsl_core::excitation::{
    exclusion_scan, quadrupole_consistency, quadrupole_rate_qrcsl, quadrupole_rate_rcsl, ExcitationPrediction,
    NucleusSpec, GE74_NUCLEI_PER_KG, GE_ALL_NUCLEI_PER_KG,
};
use qrcsl_core::free_rates::{
    collapse_decay_rate, collapse_rate_momentum_space, cross_term_bound, energy_rate_asymptote,
    energy_rate_dimensionless, energy_rate_exact, TwoPacketState,
};
use qrcsl_core::kernels::{
    commutator_profile_sampler, fourier_kernel_volume_integral, fourier_onshell_kernel,
    fourier_onshell_kernel_quadrature, gaussian_nomeasure_integral, gaussian_nomeasure_integral_quadrature,
    gaussian_onshell_integral, gaussian_onshell_integral_quadrature, profile_ratio,
    smeared_commutator_profile_quadrature, KernelValue,
};
use qrcsl_core::trajectories::{
    build_collapse_operators, master_evolve, DensityMatrixGrid, EnsembleConfig, Grid1D, OperatorSpec, StateVector,
};
use qrcsl_core::ModelVariant;

use crate::config::{RunConfig, Subcommand};
use crate::error::{LabError, EXIT_OK, EXIT_UNRELIABLE};
use crate::output::{Cell, Record, ResultEnvelope, Table};
use crate::parallel::{mc_integrate_par, run_ensemble_par, with_pool};

/// Relative tolerance requested from the quadrature paths.
const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Momentum magnitude (units of μ) at which frame-dependent kernels are
/// also evaluated, besides the rest frame.
const BOOSTED_MOMENTUM: f64 = 1.5;

/// Energy-rate rows for this many particles in the physical record.
const ENERGY_RATE_PARTICLES: f64 = 1.0;

pub struct Outcome {
    pub envelope: ResultEnvelope,
    pub exit_code: i32,
}

struct Output {
    records: Vec<Record>,
    table: Table,
    unreliable: bool,
}

impl Output {
    fn new(records: Vec<Record>, table: Table) -> Self {
        Self {
            records,
            table,
            unreliable: false,
        }
    }
}

/// Run `config` inside a pool of `threads` workers.
pub fn execute(config: &RunConfig, threads: Option<usize>) -> Result<Outcome, LabError> {
    with_pool(threads, || run(config))?
}

/// Dispatch on the current rayon pool.
pub fn run(config: &RunConfig) -> Result<Outcome, LabError> {
    let out = match config.subcommand {
        Subcommand::Kernels => kernels(config)?,
        Subcommand::CollapseRate => collapse_rate(config)?,
        Subcommand::EnergyRate => energy_rate(config)?,
        Subcommand::Simulate => simulate(config)?,
        Subcommand::Excitation => excitation(config)?,
        Subcommand::Scan => scan(config)?,
    };
    let mut envelope = ResultEnvelope::new(config, out.records, out.table);
    envelope.unreliable = out.unreliable;
    let exit_code = if out.unreliable { EXIT_UNRELIABLE } else { EXIT_OK };
    Ok(Outcome { envelope, exit_code })
}

fn relative_deviation(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}

/// `points` values spaced evenly in log between `lo` and `hi`.
pub fn log_space(lo: f64, hi: f64, points: u64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => {
            let (l0, l1) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

fn kernel_row(table: &mut Table, quantity: &str, mu: f64, argument: f64, reference: KernelValue, value: KernelValue) {
    table.push(vec![
        quantity.into(),
        mu.into(),
        argument.into(),
        reference.value.into(),
        value.value.into(),
        reference.units.as_str().into(),
        value.method.as_str().into(),
        relative_deviation(value.value, reference.value).into(),
        Cell::Number(0.0),
    ]);
}

fn kernels(config: &RunConfig) -> Result<Output, LabError> {
    let k = &config.kernels;
    let mut table = Table::new(&[
        ("quantity", ""),
        ("mu", ""),
        ("argument", ""),
        ("reference", ""),
        ("value", ""),
        ("units", ""),
        ("method", ""),
        ("relative_deviation", ""),
        ("std_error", ""),
    ]);
    let mut worst: f64 = 0.0;
    for &mu in &k.mu {
        for p in [0.0, BOOSTED_MOMENTUM * mu] {
            let closed = gaussian_onshell_integral(p, mu)?;
            let quad = gaussian_onshell_integral_quadrature(p, mu)?;
            worst = worst.max(relative_deviation(quad.value, closed.value));
            kernel_row(&mut table, "onshell_gaussian", mu, p, closed, quad);
        }
        for e1 in [1.0, (1.0 + BOOSTED_MOMENTUM * BOOSTED_MOMENTUM).sqrt()] {
            let closed = gaussian_nomeasure_integral(e1, mu)?;
            let quad = gaussian_nomeasure_integral_quadrature(e1, mu)?;
            worst = worst.max(relative_deviation(quad.value, closed.value));
            kernel_row(&mut table, "nomeasure_gaussian", mu, e1, closed, quad);
        }
        // commutator kernel through its Fourier representation, r = 1/μ
        let r = 1.0 / mu;
        let closed = fourier_onshell_kernel(r, mu)?;
        let quad = fourier_onshell_kernel_quadrature(r, mu)?;
        worst = worst.max(relative_deviation(quad.value, closed.value));
        kernel_row(&mut table, "fourier_onshell", mu, r, closed, quad);

        let exact = 2.0 * std::f64::consts::PI.powi(2) / (mu * mu);
        let volume = fourier_kernel_volume_integral(mu)?;
        let dev = relative_deviation(volume, exact);
        worst = worst.max(dev);
        table.push(vec![
            "kernel_volume_integral".into(),
            mu.into(),
            Cell::Number(0.0),
            exact.into(),
            volume.into(),
            "1/a^2".into(),
            "quadrature".into(),
            dev.into(),
            Cell::Number(0.0),
        ]);
    }

    let mu = k.profile_mu;
    let at_zero = mc_integrate_par(commutator_profile_sampler(0.0, mu)?, k.samples, config.seed)?;
    let mut profile_ok = true;
    let mut previous = f64::INFINITY;
    let mut low_confidence = false;
    for &d in &k.separations {
        let quad = smeared_commutator_profile_quadrature(d, mu)?;
        let estimate = if d == 0.0 {
            profile_ratio(&at_zero, &at_zero, true)
        } else {
            let at_d = mc_integrate_par(commutator_profile_sampler(d, mu)?, k.samples, config.seed)?;
            profile_ratio(&at_d, &at_zero, false)
        };
        profile_ok &= quad <= previous;
        previous = quad;
        low_confidence |= estimate.low_confidence;
        table.push(vec![
            "smeared_profile".into(),
            mu.into(),
            d.into(),
            quad.into(),
            estimate.ratio.mean.into(),
            "1".into(),
            "monte-carlo".into(),
            relative_deviation(estimate.ratio.mean, quad).into(),
            estimate.ratio.std_error.into(),
        ]);
    }
    let records = vec![
        Record::new("max_relative_deviation", worst, "1", "closed-form vs quadrature").tolerance(QUADRATURE_TOLERANCE),
        Record::new("profile_monotone", profile_ok, "", "quadrature"),
        Record::new("profile_low_confidence", low_confidence, "", "monte-carlo"),
        Record::new("profile_samples", k.samples, "", "monte-carlo"),
    ];
    Ok(Output::new(records, table))
}

fn two_packet(config: &RunConfig) -> Result<TwoPacketState, LabError> {
    let s = &config.state;
    Ok(TwoPacketState::new(s.separation, s.width, s.weight_left)?)
}

/// Above this μ the momentum-space check is skipped: it agrees with the
/// position route to its tolerance and only costs time.
const MOMENTUM_ROUTE_MAX_MU: f64 = 1e4;

fn collapse_rate(config: &RunConfig) -> Result<Output, LabError> {
    let state = two_packet(config)?;
    let base = config.params.model()?;
    let mut table = Table::new(&[
        ("mu", ""),
        ("rate", "lambda"),
        ("rate_momentum_space", "lambda"),
        ("rate_physical", "1/s"),
        ("deviation_from_lambda", ""),
        ("regime_warning", ""),
    ]);
    let rows: Vec<_> = config
        .collapse_rate_mu
        .par_iter()
        .map(|&mu| -> Result<Vec<Cell>, LabError> {
            let params = base.with_mass(mu / base.a())?;
            let rate = collapse_decay_rate(&state, &params)?;
            let momentum = if mu <= MOMENTUM_ROUTE_MAX_MU {
                Cell::Number(collapse_rate_momentum_space(&state, mu)?)
            } else {
                Cell::Text(String::new())
            };
            Ok(vec![
                mu.into(),
                rate.value_dimensionless.into(),
                momentum,
                rate.value_physical.into(),
                (1.0 - rate.value_dimensionless).into(),
                rate.regime_warning.into(),
            ])
        })
        .collect();
    for row in rows {
        table.push(row?);
    }
    let physical = collapse_decay_rate(&state, &base)?;
    let records = vec![
        Record::new("rate_at_configured_mass", physical.value_physical, "1/s", "quadrature")
            .tolerance(QUADRATURE_TOLERANCE),
        Record::new("mu", physical.mu, "", "exact"),
        Record::new("cross_term_bound", cross_term_bound(&state)?, "1", "quadrature"),
    ];
    Ok(Output::new(records, table))
}

fn energy_rate(config: &RunConfig) -> Result<Output, LabError> {
    let e = &config.energy_rate;
    let mut table = Table::new(&[
        ("mu", ""),
        ("g_mu", "lambda M"),
        ("asymptote", "lambda M"),
        ("relative_deviation", ""),
    ]);
    for mu in log_space(e.mu_min, e.mu_max, e.points) {
        let g = energy_rate_dimensionless(mu)?;
        let asym = energy_rate_asymptote(mu);
        table.push(vec![
            mu.into(),
            g.into(),
            asym.into(),
            relative_deviation(g, asym).into(),
        ]);
    }
    let params = config.params.model()?;
    let physical = energy_rate_exact(&params, ENERGY_RATE_PARTICLES)?;
    let records = vec![
        Record::new("mu", physical.mu, "", "exact"),
        Record::new("g_mu", physical.value_dimensionless, "lambda M", "closed-form"),
        Record::new(
            "energy_rate_per_particle",
            physical.value_physical,
            "erg/s",
            "closed-form",
        ),
    ];
    Ok(Output::new(records, table))
}

fn simulate(config: &RunConfig) -> Result<Output, LabError> {
    let g = &config.grid;
    let e = &config.ensemble;
    let grid = Grid1D::new(g.n_points as usize, g.dx, g.dt)?;
    let spec = match e.variant {
        ModelVariant::Qrcsl => OperatorSpec::qrcsl(e.mu, e.p_max),
        _ => OperatorSpec::csl(),
    };
    let ops = build_collapse_operators(&grid, spec)?;
    let state = two_packet(config)?;
    let psi = StateVector::two_packet(&grid, &state)?;
    let ensemble = EnsembleConfig {
        n_traj: e.n_traj,
        t_final: e.t_final,
        scheme: e.scheme,
        seed: config.seed,
        checkpoints: e.checkpoints as usize,
        kinetic: e.kinetic,
    };
    let stats = run_ensemble_par(&psi, &ops, &ensemble)?;
    let rho0 = DensityMatrixGrid::pure(&psi);
    let master = if e.kinetic == 0.0 {
        master_evolve(&rho0, &ops, e.t_final)?
    } else {
        qrcsl_core::trajectories::master_evolve_observed(&rho0, &ops, e.t_final, e.kinetic)?.rho
    };
    let residual = stats.mean_density.operator_distance(&master);

    let mut table = Table::new(&[("time", "1/lambda"), ("weight_mean", ""), ("std_error", "")]);
    for p in &stats.martingale {
        table.push(vec![p.time.into(), p.mean.into(), p.std_error.into()]);
    }
    let born = state.weight_left();
    let records = vec![
        Record::new("left_fraction", stats.left_fraction, "1", "monte-carlo").std_error(stats.left_std_error),
        Record::new("born_probability", born, "1", "exact"),
        Record::new("density_residual", residual, "1", "monte-carlo vs master equation"),
        Record::new("weight_mean", stats.weight_mean, "1", "monte-carlo"),
        Record::new("dead_fraction", stats.dead_fraction, "1", "monte-carlo"),
        Record::new("n_traj", stats.n_traj, "", "monte-carlo"),
        Record::new("scheme", e.scheme.as_str(), "", ""),
        Record::new("variant", e.variant.as_str(), "", ""),
        Record::new("flagged", stats.flagged, "", "monte-carlo"),
    ];
    let mut out = Output::new(records, table);
    out.unreliable = stats.flagged;
    Ok(out)
}

fn prediction_records(prefix: &str, p: &ExcitationPrediction) -> Vec<Record> {
    vec![
        Record::new(
            &format!("{prefix}_rate_per_nucleus"),
            p.rate_per_nucleus,
            "1/s",
            "closed-form",
        ),
        Record::new(
            &format!("{prefix}_counts"),
            p.counts_per_kg_day,
            "counts/kg/day",
            "closed-form",
        ),
        Record::new(&format!("{prefix}_flag"), p.flag.as_str(), "", "against bound"),
    ]
}

fn excitation(config: &RunConfig) -> Result<Output, LabError> {
    let params = config.params.model()?;
    let nucleus = config.excitation.nucleus()?;
    let qrcsl = quadrupole_rate_qrcsl(&nucleus, &params);
    let rcsl = quadrupole_rate_rcsl(&nucleus, &params);

    // strength implied by the measured lifetime, fed back through both routes
    let unit = quadrupole_consistency(1.0, &nucleus, &params)?;
    let strength = unit.tau_implied / nucleus.tau;
    let consistency = quadrupole_consistency(strength, &nucleus, &params)?;

    let mut records = Vec::new();
    records.extend(prediction_records("qrcsl", &qrcsl));
    records.extend(prediction_records("rcsl", &rcsl));
    records.push(Record::new("bound", GE_EMISSION_BOUND, "counts/kg/day", "measured"));
    records.push(Record::new("nuclei_per_kg", nucleus.nuclei_per_kg, "1/kg", "input"));
    records.push(Record::new("quadrupole_strength", strength, "cm^4", "from lifetime"));
    records.push(
        Record::new(
            "qrcsl_rate_via_strength",
            consistency.rate_via_strength,
            "1/s",
            "closed-form",
        )
        .tolerance(1e-12),
    );

    let mut table = Table::new(&[
        ("model", ""),
        ("nuclei_per_kg", "1/kg"),
        ("rate_per_nucleus", "1/s"),
        ("rate", "counts/kg/day"),
        ("bound", "counts/kg/day"),
        ("flag", ""),
    ]);
    let mut densities = vec![nucleus.nuclei_per_kg];
    for n in [GE74_NUCLEI_PER_KG, GE_ALL_NUCLEI_PER_KG] {
        if !densities.contains(&n) {
            densities.push(n);
        }
    }
    for n in densities {
        let spec = NucleusSpec {
            nuclei_per_kg: n,
            ..nucleus.clone()
        };
        for (model, p) in [
            ("QRCSL", quadrupole_rate_qrcsl(&spec, &params)),
            ("RCSL", quadrupole_rate_rcsl(&spec, &params)),
        ] {
            table.push(vec![
                model.into(),
                n.into(),
                p.rate_per_nucleus.into(),
                p.counts_per_kg_day.into(),
                p.bound.into(),
                p.flag.as_str().into(),
            ]);
        }
    }
    Ok(Output::new(records, table))
}

fn scan(config: &RunConfig) -> Result<Output, LabError> {
    let s = &config.scan;
    let base = config.params.model()?;
    let nucleus = config.excitation.nucleus()?;
    let lambdas = log_space(s.lambda_min, s.lambda_max, s.lambda_points);
    let a_values = log_space(s.a_min, s.a_max, s.a_points);
    let blocks: Vec<_> = lambdas
        .par_iter()
        .map(|&l| exclusion_scan(&[l], &a_values, &nucleus, &base))
        .collect();
    let mut table = Table::new(&[
        ("lambda", "1/s"),
        ("a", "cm"),
        ("qrcsl_rate", "counts/kg/day"),
        ("qrcsl_flag", ""),
        ("rcsl_rate", "counts/kg/day"),
        ("rcsl_flag", ""),
    ]);
    let (mut qrcsl_excluded, mut rcsl_excluded) = (0u64, 0u64);
    for block in blocks {
        for row in block? {
            qrcsl_excluded += (row.qrcsl.flag.as_str() == "excluded") as u64;
            rcsl_excluded += (row.rcsl.flag.as_str() == "excluded") as u64;
            table.push(vec![
                row.lambda.into(),
                row.a.into(),
                row.qrcsl.counts_per_kg_day.into(),
                row.qrcsl.flag.as_str().into(),
                row.rcsl.counts_per_kg_day.into(),
                row.rcsl.flag.as_str().into(),
            ]);
        }
    }
    let records = vec![
        Record::new("points", table.rows.len() as u64, "", "grid"),
        Record::new("qrcsl_excluded_points", qrcsl_excluded, "", "against bound"),
        Record::new("rcsl_excluded_points", rcsl_excluded, "", "against bound"),
        Record::new("bound", GE_EMISSION_BOUND, "counts/kg/day", "measured"),
    ];
    Ok(Output::new(records, table))
}
