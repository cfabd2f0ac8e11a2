//! Collapse operator sets on the lattice.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{signed_index, Grid1D};
use crate::{Error, ModelVariant, Result};

/// Which operator set to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub variant: ModelVariant,
    /// `μ = M·a`, QRCSL only.
    pub mu: f64,
    /// Momentum cutoff in `1/a`, QRCSL only; modes with `|k| > p_max` are
    /// untouched by collapse.
    pub p_max: f64,
    /// Collapse rate in simulation units (1 by convention).
    pub lambda: f64,
}

impl OperatorSpec {
    pub fn csl() -> Self {
        Self {
            variant: ModelVariant::Csl,
            mu: f64::INFINITY,
            p_max: f64::INFINITY,
            lambda: 1.0,
        }
    }

    pub fn qrcsl(mu: f64, p_max: f64) -> Self {
        Self {
            variant: ModelVariant::Qrcsl,
            mu,
            p_max,
            lambda: 1.0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
}

/// One Hermitian operator per site, stored as the momentum kernel `R` of
/// the operator centred at `x = 0`.
#[derive(Debug, Clone)]
pub struct CollapseOperatorSet {
    grid: Grid1D,
    spec: OperatorSpec,
    /// `R(k_m, k_m′)`, real symmetric.
    kernel: DMatrix<f64>,
    /// CSL only: `g(x_j)` for the site at `x = 0`, indexed by lattice offset.
    profile: Option<Vec<f64>>,
    /// `Σ_i dx A_i²`, diagonal in momentum.
    collapse_diagonal: Vec<f64>,
    /// Unitary DFT, momentum ← position.
    dft: DMatrix<Complex64>,
}

/// `(πa²)^{-1/4} e^{−d²/2}` with `a = 1`.
fn csl_profile(d: f64) -> f64 {
    exp(-0.5 * d * d) / sqrt(sqrt(PI))
}

pub fn build_collapse_operators(grid: &Grid1D, spec: OperatorSpec) -> Result<CollapseOperatorSet> {
    if !(spec.lambda >= 0.0) || spec.lambda.is_infinite() {
        return Err(Error::domain("lambda", spec.lambda, "lambda >= 0"));
    }
    let n = grid.n_points();
    let l = grid.length();
    let mut kernel = DMatrix::<f64>::zeros(n, n);
    let mut profile = None;
    match spec.variant {
        ModelVariant::Csl => {
            let g: Vec<f64> = (0..n)
                .map(|j| csl_profile(grid.min_image(grid.position(j), 0.0)))
                .collect();
            // R depends on the index difference only
            let by_difference: Vec<f64> = (0..n)
                .map(|q| {
                    let k = grid.momentum(q);
                    (0..n).map(|j| g[j] * cos(k * grid.position(j))).sum::<f64>() / n as f64
                })
                .collect();
            for m in 0..n {
                for mp in 0..n {
                    kernel[(m, mp)] = by_difference[(m + n - mp) % n];
                }
            }
            let mut by_offset = alloc::vec![0.0; n];
            for j in 0..n {
                by_offset[(j + n - n / 2) % n] = g[j];
            }
            profile = Some(by_offset);
        }
        ModelVariant::Qrcsl => {
            let mu = spec.mu;
            if !(mu > 0.0) || mu.is_infinite() {
                return Err(Error::domain("mu", mu, "mu > 0"));
            }
            let first = 2.0 * PI / l;
            if !(spec.p_max >= first) {
                return Err(Error::domain(
                    "p_max",
                    spec.p_max,
                    "p_max must reach the first nonzero lattice momentum 2π/L",
                ));
            }
            let prefactor = sqrt(2.0 * PI) / (l * sqrt(sqrt(PI)));
            for m in 0..n {
                let k = grid.momentum(m);
                if k.abs() > spec.p_max {
                    continue;
                }
                let e = sqrt(k * k + mu * mu);
                for mp in 0..n {
                    let kp = grid.momentum(mp);
                    if kp.abs() > spec.p_max {
                        continue;
                    }
                    let ep = sqrt(kp * kp + mu * mu);
                    let transfer = 2.0 * PI * signed_index((m + n - mp) % n, n) as f64 / l;
                    let de = (k - kp) * (k + kp) / (e + ep);
                    let interval = transfer * transfer - de * de;
                    kernel[(m, mp)] = prefactor * mu / sqrt(e * ep) * exp(-0.5 * interval);
                }
            }
        }
        ModelVariant::Rcsl => {
            return Err(Error::Invalid("lattice operators exist for CSL and QRCSL only"));
        }
    }

    let collapse_diagonal: Vec<f64> = (0..n)
        .map(|m| l * (0..n).map(|mp| kernel[(m, mp)] * kernel[(m, mp)]).sum::<f64>())
        .collect();
    let set = CollapseOperatorSet {
        grid: *grid,
        spec,
        kernel,
        profile,
        collapse_diagonal,
        dft: dft_matrix(grid),
    };
    let stiffness = grid.dt() * set.max_collapse_eigenvalue();
    if !(stiffness < 0.1) {
        return Err(Error::Unstable(stiffness));
    }
    Ok(set)
}

fn dft_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let n = grid.n_points();
    let norm = 1.0 / sqrt(n as f64);
    DMatrix::from_fn(n, n, |m, j| {
        let phase = -grid.momentum(m) * grid.position(j);
        Complex64::new(cos(phase) * norm, sin(phase) * norm)
    })
}

impl CollapseOperatorSet {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn variant(&self) -> ModelVariant {
        self.spec.variant
    }

    pub fn lambda(&self) -> f64 {
        self.spec.lambda
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// `λ · max_k Σ_i dx A_i²(k)`.
    pub fn max_collapse_eigenvalue(&self) -> f64 {
        self.spec.lambda * self.collapse_diagonal.iter().cloned().fold(0.0, f64::max)
    }

    pub fn collapse_diagonal(&self) -> &[f64] {
        &self.collapse_diagonal
    }

    pub(crate) fn csl_profile_by_offset(&self) -> Option<&[f64]> {
        self.profile.as_deref()
    }

    /// Unitary DFT, momentum ← position.
    pub fn dft(&self) -> &DMatrix<Complex64> {
        &self.dft
    }

    pub fn to_momentum(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        &self.dft * psi
    }

    pub fn to_position(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.dft.ad_mul(psi)
    }

    /// `e^{−i(k_m − k_m′)x_i}` depends only on `(m − m′) mod N`.
    pub(crate) fn site_phase(&self, difference: usize, site: usize) -> Complex64 {
        let phase = -self.grid.momentum(difference) * self.grid.position(site);
        Complex64::new(cos(phase), sin(phase))
    }

    /// `A_i` in the momentum basis.
    pub fn operator_momentum(&self, site: usize) -> DMatrix<Complex64> {
        let n = self.grid.n_points();
        let phases: Vec<Complex64> = (0..n).map(|q| self.site_phase(q, site)).collect();
        DMatrix::from_fn(n, n, |m, mp| phases[(m + n - mp) % n] * self.kernel[(m, mp)])
    }

    /// `A_i` in the position basis.
    pub fn operator(&self, site: usize) -> DMatrix<Complex64> {
        let a = self.operator_momentum(site);
        self.dft.adjoint() * a * &self.dft
    }

    /// Whether every `A_i` is diagonal in position (CSL).
    pub fn is_position_diagonal(&self) -> bool {
        self.profile.is_some()
    }
}
