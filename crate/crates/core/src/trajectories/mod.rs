//! Stochastic collapse dynamics of one particle on a periodic 1-d lattice.
//!
//! Lengths are in units of `a`, time in units of `1/λ_sim`. Sites sit at
//! `x_j = (j − N/2)·dx`; lattice momenta are `k_m = 2π m′/L` with `m′` the
//! signed (FFT-ordered) index and `L = N·dx`. Collapse operators are stored
//! through their momentum-space kernel `R(k, k′)` so that the operator at
//! site `i` is `R(k, k′) e^{−i(k−k′)x_i}`; momentum transfers are taken
//! modulo the reciprocal lattice, which keeps the CSL set exact on the
//! lattice and the QRCSL exponent spacelike.
//!
//! The noise couples to every site within one time step through a single
//! exponent, so there is no ordering among sites; the splitting between the
//! noise term and the `Σ A²` term is symmetric (Strang).

mod master;
mod operators;
mod stochastic;

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, sqrt};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::free_rates::TwoPacketState;
use crate::{Error, Result};

pub use master::{master_evolve, master_evolve_observed, offdiagonal_decay_rate, MasterRun};
pub use operators::{build_collapse_operators, CollapseOperatorSet, OperatorSpec};
pub use stochastic::{
    chunk_count, run_ensemble, run_trajectory, run_trajectory_chunk, step_trajectory, validate_ensemble,
    EnsembleAccumulator, EnsembleConfig, EnsembleStats, MartingalePoint, NoiseRealization, NoiseScheme,
    TrajectoryResult, CHUNK_SIZE,
};

/// Periodic lattice and time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_points: usize,
    dx: f64,
    dt: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, dx: f64, dt: f64) -> Result<Self> {
        if n_points < 8 {
            return Err(Error::domain("n_points", n_points as f64, "n_points >= 8"));
        }
        if !(dx > 0.0) || dx.is_infinite() {
            return Err(Error::domain("dx", dx, "dx > 0"));
        }
        if !(dt > 0.0) || dt.is_infinite() {
            return Err(Error::domain("dt", dt, "dt > 0"));
        }
        Ok(Self { n_points, dx, dt })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn length(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    /// Signed lattice momentum of FFT index `m`.
    pub fn momentum(&self, m: usize) -> f64 {
        2.0 * PI * signed_index(m, self.n_points) as f64 / self.length()
    }

    /// `x − y` reduced to `[−L/2, L/2)`.
    pub fn min_image(&self, x: f64, y: f64) -> f64 {
        let l = self.length();
        let mut d = (x - y) % l;
        if d >= 0.5 * l {
            d -= l;
        } else if d < -0.5 * l {
            d += l;
        }
        d
    }
}

/// FFT-ordered index to signed index in `[−N/2, N/2)`.
pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    let m = (m % n) as i64;
    let n = n as i64;
    if m >= (n + 1) / 2 {
        m - n
    } else {
        m
    }
}

/// Position-space amplitudes. The evolution is unnormalized, so the norm
/// carries probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("state amplitudes must be finite"));
        }
        let state = Self { amplitudes };
        if !(state.norm_squared() > 0.0) {
            return Err(Error::Invalid("state norm must be positive"));
        }
        Ok(state)
    }

    /// Normalized packet `∝ exp(−(x − center)²/4σ²)` (periodic distance).
    pub fn gaussian_packet(grid: &Grid1D, center: f64, width: f64) -> Result<Self> {
        Self::two_packet_with_centers(grid, center, center, width, 1.0)
    }

    /// `√w_L φ_L + √(1 − w_L) φ_R` with packets at `∓separation/2`.
    pub fn two_packet(grid: &Grid1D, state: &TwoPacketState) -> Result<Self> {
        let half = 0.5 * state.separation();
        Self::two_packet_with_centers(grid, -half, half, state.width(), state.weight_left())
    }

    fn two_packet_with_centers(grid: &Grid1D, left: f64, right: f64, width: f64, weight_left: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::domain("width", width, "width > 0"));
        }
        let packet = |c: f64| -> DVector<f64> {
            let v = DVector::from_iterator(
                grid.n_points(),
                (0..grid.n_points()).map(|j| {
                    let d = grid.min_image(grid.position(j), c);
                    exp(-d * d / (4.0 * width * width))
                }),
            );
            let n = v.norm();
            v / n
        };
        let alpha = sqrt(weight_left);
        let beta = sqrt(1.0 - weight_left);
        let mut psi = packet(left) * alpha;
        if beta > 0.0 {
            psi += packet(right) * beta;
        }
        let psi = psi.map(|x| Complex64::new(x, 0.0));
        let mut state = Self::from_amplitudes(psi)?;
        state.normalize();
        Ok(state)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = sqrt(self.norm_squared());
        if n > 0.0 {
            self.amplitudes /= Complex64::new(n, 0.0);
        }
    }

    /// Probability on sites with `x < 0` relative to the total.
    pub fn left_probability(&self, grid: &Grid1D) -> f64 {
        let mut left = 0.0;
        let mut total = 0.0;
        for (j, z) in self.amplitudes.iter().enumerate() {
            let p = z.norm_sqr();
            total += p;
            if grid.position(j) < 0.0 {
                left += p;
            }
        }
        left / total
    }
}

/// Density matrix in the position basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrixGrid {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Invalid("density matrix must be square"));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Spectral norm of `self − other`.
    pub fn operator_distance(&self, other: &DensityMatrixGrid) -> f64 {
        let diff = &self.matrix - &other.matrix;
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}
