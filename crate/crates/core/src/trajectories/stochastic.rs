//! Unnormalized stochastic evolution, its probability rule, and ensembles.
//!
//! One step multiplies the state by
//! `exp{−(4λ)⁻¹ Σ_i dx dt (w_i − 2λA_i)²}`. Splitting off the c-number part,
//! `ψ̃ = exp{dx dt Σ_i (w_i A_i − λ A_i²)} ψ` and the probability of the
//! noise history is `‖ψ̃‖²` times the Gaussian reference density
//! `N(0, λ/(dx dt))` per site and step.
//!
//! * Raw scheme: `w` is drawn from the reference density; `‖ψ̃‖²` is the
//!   trajectory weight and its ensemble mean is exactly one.
//! * Cooked scheme: `w_i = 2λ⟨A_i⟩ + √(λ/(dx dt)) ξ_i`, close to the
//!   physical distribution; the likelihood ratio physical/cooked is kept
//!   as the weight so that weighted averages stay exact.
//!
//! States are renormalized every step; weights are carried as logarithms.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operators::CollapseOperatorSet;
use super::{DensityMatrixGrid, StateVector};
use crate::numerics::montecarlo::{fill_standard_normal, stream_rng, McAccumulator, McRng};
use crate::{Error, Result};

/// Trajectories per reduction chunk. Chunks are reduced in index order.
pub const CHUNK_SIZE: u64 = 64;
/// Below this squared norm a trajectory is a probability-zero branch.
const DEAD_NORM: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseScheme {
    Cooked,
    Raw,
}

impl NoiseScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseScheme::Cooked => "cooked",
            NoiseScheme::Raw => "raw",
        }
    }
}

/// Sampled field `w` for one trajectory, step-major (`steps × sites`).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub scheme: NoiseScheme,
    pub seed: u64,
    pub trajectory: u64,
    pub n_sites: usize,
    pub values: Vec<f64>,
}

impl NoiseRealization {
    pub fn steps(&self) -> usize {
        self.values.len() / self.n_sites.max(1)
    }

    pub fn step(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_sites..(k + 1) * self.n_sites]
    }
}

/// Evolves a state by `exp{dx dt Σ_i (w_i A_i − λ A_i²)}`; `dx Σ_i A_i²` is
/// the collapse diagonal.
struct Propagator<'a> {
    ops: &'a CollapseOperatorSet,
    h: f64,
    dt: f64,
    root_n: f64,
}

impl<'a> Propagator<'a> {
    fn new(ops: &'a CollapseOperatorSet, dt: f64) -> Self {
        Self {
            ops,
            h: ops.grid().dx() * dt,
            dt,
            root_n: sqrt(ops.grid().n_points() as f64),
        }
    }

    /// `⟨ψ|A_i|ψ⟩` for every site, `ψ` in position basis.
    fn expectations(&self, psi: &DVector<Complex64>) -> Vec<f64> {
        let n = psi.len();
        if let Some(g) = self.ops.csl_profile_by_offset() {
            let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            return (0..n)
                .map(|i| (0..n).map(|j| g[(j + n - i) % n] * p[j]).sum())
                .collect();
        }
        let phi = self.ops.to_momentum(psi);
        let r = self.ops.kernel();
        // S_q = Σ_{m − m′ ≡ q} conj(φ_m) R(m, m′) φ_m′
        let mut s = DVector::<Complex64>::zeros(n);
        for m in 0..n {
            let left = phi[m].conj();
            for mp in 0..n {
                let rv = r[(m, mp)];
                if rv != 0.0 {
                    s[(m + n - mp) % n] += left * phi[mp] * rv;
                }
            }
        }
        let f = self.ops.dft();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..n {
                    acc += s[q] * f[(q, i)];
                }
                acc.re * self.root_n
            })
            .collect()
    }

    /// `exp{dx dt Σ (w_i A_i − λ A_i²)} ψ`, position basis in and out.
    fn apply(&self, psi: &DVector<Complex64>, w: &[f64]) -> DVector<Complex64> {
        let n = psi.len();
        let lambda = self.ops.lambda();
        if let Some(g) = self.ops.csl_profile_by_offset() {
            let c = self.ops.collapse_diagonal()[0];
            return DVector::from_iterator(
                n,
                (0..n).map(|j| {
                    let field: f64 = (0..n).map(|i| w[i] * g[(j + n - i) % n]).sum();
                    psi[j] * exp(self.h * field - self.dt * lambda * c)
                }),
            );
        }
        let f = self.ops.dft();
        let w_hat: Vec<Complex64> = (0..n)
            .map(|q| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, wi) in w.iter().enumerate() {
                    acc += f[(q, i)] * *wi;
                }
                acc * self.root_n
            })
            .collect();
        let r = self.ops.kernel();
        let b = DMatrix::from_fn(n, n, |m, mp| w_hat[(m + n - mp) % n] * (r[(m, mp)] * self.h));
        let half: Vec<f64> = self
            .ops
            .collapse_diagonal()
            .iter()
            .map(|c| exp(-0.5 * self.dt * lambda * c))
            .collect();
        let mut phi = self.ops.to_momentum(psi);
        for (z, d) in phi.iter_mut().zip(&half) {
            *z *= *d;
        }
        phi = exp_times(&b, &phi);
        for (z, d) in phi.iter_mut().zip(&half) {
            *z *= *d;
        }
        self.ops.to_position(&phi)
    }
}

/// `e^{B} v` by Taylor series summed to machine precision (`‖B‖ ≪ 1` here).
fn exp_times(b: &DMatrix<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut sum = v.clone();
    let mut term = v.clone();
    let scale = v.norm();
    for k in 1..40 {
        term = b * term / Complex64::new(k as f64, 0.0);
        sum += &term;
        if term.norm() <= 1e-17 * scale {
            break;
        }
    }
    sum
}

fn apply_kinetic(psi: &mut DVector<Complex64>, ops: &CollapseOperatorSet, kinetic: f64, dt: f64) {
    if kinetic == 0.0 {
        return;
    }
    let grid = ops.grid();
    let mut phi = ops.to_momentum(psi);
    for (m, z) in phi.iter_mut().enumerate() {
        let k = grid.momentum(m);
        *z *= Complex64::from_polar(1.0, -kinetic * k * k * dt);
    }
    *psi = ops.to_position(&phi);
}

/// One unnormalized step `exp{−(4λ)⁻¹ Σ_i dx dt (w_i − 2λA_i)²} ψ` with the
/// noise slice `noise` (one value per site) and the grid's `dt`.
/// `λ = 0` is the identity.
pub fn step_trajectory(state: &StateVector, ops: &CollapseOperatorSet, noise: &[f64]) -> Result<StateVector> {
    let grid = ops.grid();
    if noise.len() != grid.n_points() {
        return Err(Error::Invalid("noise slice length differs from the grid"));
    }
    let lambda = ops.lambda();
    if lambda == 0.0 {
        return Ok(state.clone());
    }
    let prop = Propagator::new(ops, grid.dt());
    let psi = prop.apply(state.amplitudes(), noise);
    let reference: f64 = noise.iter().map(|w| w * w).sum::<f64>() * prop.h / (4.0 * lambda);
    let psi = psi * Complex64::new(exp(-reference), 0.0);
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if !(norm >= DEAD_NORM) {
        return Err(Error::Invalid("state norm underflowed: dead trajectory"));
    }
    StateVector::from_amplitudes(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// At least 100.
    pub n_traj: u64,
    pub t_final: f64,
    pub scheme: NoiseScheme,
    pub seed: u64,
    /// Number of martingale checkpoints after `t = 0`.
    pub checkpoints: usize,
    /// Coefficient `κ` of an optional free Hamiltonian `κ k²`; 0 freezes it.
    pub kinetic: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_traj: 1000,
            t_final: 10.0,
            scheme: NoiseScheme::Cooked,
            seed: 0x5eed,
            checkpoints: 10,
            kinetic: 0.0,
        }
    }
}

impl EnsembleConfig {
    fn validate(&self) -> Result<()> {
        if self.n_traj < 100 {
            return Err(Error::domain("n_traj", self.n_traj as f64, "n_traj >= 100"));
        }
        if !(self.t_final > 0.0) || self.t_final.is_infinite() {
            return Err(Error::domain("t_final", self.t_final, "t_final > 0"));
        }
        if !self.kinetic.is_finite() {
            return Err(Error::domain("kinetic", self.kinetic, "finite"));
        }
        Ok(())
    }

    fn schedule(&self, dt: f64) -> (usize, f64, usize) {
        let steps = ((self.t_final / dt).ceil() as usize).max(1);
        let dt = self.t_final / steps as f64;
        let stride = (steps / self.checkpoints.max(1)).max(1);
        (steps, dt, stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub index: u64,
    /// Log of the trajectory weight (raw: `‖ψ̃‖²`; cooked: likelihood ratio).
    pub log_weight: f64,
    pub dead: bool,
    pub left_probability: f64,
    /// Normalized final state.
    pub final_state: StateVector,
    /// Weight at `t = 0` and at every checkpoint.
    pub checkpoint_weights: Vec<f64>,
    pub noise: Option<NoiseRealization>,
}

/// Trajectory `index` of an ensemble; its random stream is
/// `(config.seed, index)`.
pub fn run_trajectory(
    initial: &StateVector,
    ops: &CollapseOperatorSet,
    config: &EnsembleConfig,
    index: u64,
    record_noise: bool,
) -> Result<TrajectoryResult> {
    let grid = ops.grid();
    let n = grid.n_points();
    if initial.amplitudes().len() != n {
        return Err(Error::Invalid("state size differs from the grid"));
    }
    let (steps, dt, stride) = config.schedule(grid.dt());
    let prop = Propagator::new(ops, dt);
    let lambda = ops.lambda();
    let sigma = sqrt(lambda / prop.h);
    let mut rng: McRng = stream_rng(config.seed, index);
    let mut psi = initial.amplitudes().clone();
    let norm0 = psi.norm();
    psi /= Complex64::new(norm0, 0.0);
    let mut log_weight = 0.0;
    let mut dead = false;
    let mut checkpoint_weights = alloc::vec![1.0];
    let mut noise = record_noise.then(|| NoiseRealization {
        scheme: config.scheme,
        seed: config.seed,
        trajectory: index,
        n_sites: n,
        values: Vec::with_capacity(steps * n),
    });
    let mut xi = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for step in 1..=steps {
        if !dead && lambda > 0.0 {
            fill_standard_normal(&mut rng, &mut xi);
            match config.scheme {
                NoiseScheme::Raw => {
                    for i in 0..n {
                        w[i] = sigma * xi[i];
                    }
                }
                NoiseScheme::Cooked => {
                    let mean = prop.expectations(&psi);
                    for i in 0..n {
                        w[i] = 2.0 * lambda * mean[i] + sigma * xi[i];
                    }
                    // log N(w; 0, σ²) − log N(w; 2λ⟨A⟩, σ²)
                    log_weight += 0.5
                        * (0..n)
                            .map(|i| xi[i] * xi[i] - (w[i] / sigma) * (w[i] / sigma))
                            .sum::<f64>();
                }
            }
            if let Some(rec) = noise.as_mut() {
                rec.values.extend_from_slice(&w);
            }
            let next = prop.apply(&psi, &w);
            let norm2: f64 = next.iter().map(|z| z.norm_sqr()).sum();
            if !(norm2 >= DEAD_NORM) || !norm2.is_finite() {
                dead = true;
            } else {
                log_weight += log(norm2);
                psi = next / Complex64::new(sqrt(norm2), 0.0);
                if log_weight < log(DEAD_NORM) {
                    dead = true;
                }
            }
        }
        if !dead {
            apply_kinetic(&mut psi, ops, config.kinetic, dt);
        }
        if step % stride == 0 && checkpoint_weights.len() <= config.checkpoints {
            checkpoint_weights.push(if dead { 0.0 } else { exp(log_weight) });
        }
    }
    let final_state = StateVector { amplitudes: psi };
    Ok(TrajectoryResult {
        index,
        log_weight: if dead { f64::NEG_INFINITY } else { log_weight },
        dead,
        left_probability: if dead { 0.0 } else { final_state.left_probability(grid) },
        final_state,
        checkpoint_weights,
        noise,
    })
}

/// Mergeable sums over trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    n: u64,
    dead: u64,
    sum_w: f64,
    sum_w2: f64,
    sum_w_left: f64,
    sum_w2_left: f64,
    density: DMatrix<Complex64>,
    checkpoints: Vec<McAccumulator>,
}

impl EnsembleAccumulator {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n: 0,
            dead: 0,
            sum_w: 0.0,
            sum_w2: 0.0,
            sum_w_left: 0.0,
            sum_w2_left: 0.0,
            density: DMatrix::zeros(n_sites, n_sites),
            checkpoints: Vec::new(),
        }
    }

    pub fn push(&mut self, t: &TrajectoryResult) {
        self.n += 1;
        if self.checkpoints.len() < t.checkpoint_weights.len() {
            self.checkpoints
                .resize(t.checkpoint_weights.len(), McAccumulator::default());
        }
        for (acc, w) in self.checkpoints.iter_mut().zip(&t.checkpoint_weights) {
            acc.push(*w);
        }
        if t.dead {
            self.dead += 1;
            return;
        }
        let w = exp(t.log_weight);
        let left = if t.left_probability > 0.5 { 1.0 } else { 0.0 };
        self.sum_w += w;
        self.sum_w2 += w * w;
        self.sum_w_left += w * left;
        self.sum_w2_left += w * w * left;
        let psi = t.final_state.amplitudes();
        let n = psi.len();
        for c in 0..n {
            let right = psi[c].conj() * w;
            for r in 0..n {
                self.density[(r, c)] += psi[r] * right;
            }
        }
    }

    /// Append `other`; reductions fold chunk accumulators in index order.
    pub fn merge(&mut self, other: &EnsembleAccumulator) {
        self.n += other.n;
        self.dead += other.dead;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        self.sum_w_left += other.sum_w_left;
        self.sum_w2_left += other.sum_w2_left;
        self.density += &other.density;
        if self.checkpoints.len() < other.checkpoints.len() {
            self.checkpoints
                .resize(other.checkpoints.len(), McAccumulator::default());
        }
        for (a, b) in self.checkpoints.iter_mut().zip(&other.checkpoints) {
            a.merge(b);
        }
    }

    pub fn finish(&self, config: &EnsembleConfig, dt: f64) -> Result<EnsembleStats> {
        if !(self.sum_w > 0.0) {
            return Err(Error::Unreliable("every trajectory died"));
        }
        let p = self.sum_w_left / self.sum_w;
        let var = (1.0 - 2.0 * p) * self.sum_w2_left + p * p * self.sum_w2;
        let (steps, step_dt, stride) = config.schedule(dt);
        let _ = steps;
        let martingale = self
            .checkpoints
            .iter()
            .enumerate()
            .map(|(k, acc)| MartingalePoint {
                time: (k * stride) as f64 * step_dt,
                mean: acc.mean(),
                std_error: if acc.count() > 1 {
                    sqrt(acc.variance() / acc.count() as f64)
                } else {
                    0.0
                },
            })
            .collect();
        let dead_fraction = self.dead as f64 / self.n as f64;
        Ok(EnsembleStats {
            n_traj: self.n,
            left_fraction: p,
            left_std_error: sqrt(var.max(0.0)) / self.sum_w,
            mean_density: DensityMatrixGrid::from_matrix(&self.density / Complex64::new(self.sum_w, 0.0))?,
            weight_mean: self.sum_w / self.n as f64,
            martingale,
            dead_fraction,
            flagged: dead_fraction > 0.01,
        })
    }
}

/// Ensemble mean of the trajectory weight at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingalePoint {
    pub time: f64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_traj: u64,
    /// Weighted fraction of trajectories ending with `P_L > 1/2`.
    pub left_fraction: f64,
    pub left_std_error: f64,
    /// `Σ W |ψ⟩⟨ψ| / Σ W` over normalized final states.
    pub mean_density: DensityMatrixGrid,
    pub weight_mean: f64,
    pub martingale: Vec<MartingalePoint>,
    pub dead_fraction: f64,
    /// More than 1% of trajectories died.
    pub flagged: bool,
}

/// Trajectories `[chunk·CHUNK_SIZE, (chunk+1)·CHUNK_SIZE) ∩ [0, n_traj)`.
pub fn run_trajectory_chunk(
    initial: &StateVector,
    ops: &CollapseOperatorSet,
    config: &EnsembleConfig,
    chunk: u64,
) -> Result<EnsembleAccumulator> {
    let mut acc = EnsembleAccumulator::new(ops.grid().n_points());
    let start = chunk * CHUNK_SIZE;
    let end = (start + CHUNK_SIZE).min(config.n_traj);
    for index in start..end {
        acc.push(&run_trajectory(initial, ops, config, index, false)?);
    }
    Ok(acc)
}

pub fn chunk_count(config: &EnsembleConfig) -> u64 {
    config.n_traj.div_ceil(CHUNK_SIZE)
}

/// Serial ensemble run.
pub fn run_ensemble(
    initial: &StateVector,
    ops: &CollapseOperatorSet,
    config: &EnsembleConfig,
) -> Result<EnsembleStats> {
    config.validate()?;
    let mut total = EnsembleAccumulator::new(ops.grid().n_points());
    for chunk in 0..chunk_count(config) {
        total.merge(&run_trajectory_chunk(initial, ops, config, chunk)?);
    }
    total.finish(config, ops.grid().dt())
}

/// Validate before a parallel driver fans out chunks.
pub fn validate_ensemble(config: &EnsembleConfig) -> Result<()> {
    config.validate()
}
