//! Double-commutator master equation `dρ/dt = −(λ/2) Σ_i dx [A_i, [A_i, ρ]]`,
//! integrated with classical RK4 in the momentum basis.
//!
//! With `A_i = R ∘ e^{−i(k−k′)x_i}` the site sum collapses to a momentum
//! delta, so `Σ_i dx A_i ρ A_i` costs `O(N³)`:
//! `(k, k″) ↦ L Σ_{k′} R(k, k′) ρ(k′, k″ − k + k′) R(k″ − k + k′, k″)`.

use libm::log;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operators::CollapseOperatorSet;
use super::{DensityMatrixGrid, StateVector};
use crate::free_rates::TwoPacketState;
use crate::{Error, Result};

/// Smallest tolerated eigenvalue (relative to the trace).
const POSITIVITY_TOLERANCE: f64 = 1e-8;

/// Final state plus the invariants checked along the way.
#[derive(Debug, Clone)]
pub struct MasterRun {
    pub rho: DensityMatrixGrid,
    pub steps: usize,
    pub dt: f64,
    pub trace_drift: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

fn rhs(rho: &DMatrix<Complex64>, ops: &CollapseOperatorSet, kinetic: f64) -> DMatrix<Complex64> {
    let grid = ops.grid();
    let n = grid.n_points();
    let l = grid.length();
    let r = ops.kernel();
    let c = ops.collapse_diagonal();
    let half_lambda = 0.5 * ops.lambda();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for m2 in 0..n {
        for m in 0..n {
            let mut sandwich = Complex64::new(0.0, 0.0);
            // m3 = m2 − m + m1 (mod N)
            let shift = (m2 + n - m) % n;
            for m1 in 0..n {
                let rm = r[(m, m1)];
                if rm == 0.0 {
                    continue;
                }
                let m3 = (m1 + shift) % n;
                sandwich += rho[(m1, m3)] * (rm * r[(m3, m2)]);
            }
            let mut value = -half_lambda * ((c[m] + c[m2]) * rho[(m, m2)] - 2.0 * l * sandwich);
            if kinetic != 0.0 {
                let km = grid.momentum(m);
                let km2 = grid.momentum(m2);
                value += Complex64::new(0.0, -kinetic * (km * km - km2 * km2)) * rho[(m, m2)];
            }
            out[(m, m2)] = value;
        }
    }
    out
}

fn to_momentum(rho: &DMatrix<Complex64>, ops: &CollapseOperatorSet) -> DMatrix<Complex64> {
    let f = ops.dft();
    f * rho * f.adjoint()
}

fn to_position(rho: &DMatrix<Complex64>, ops: &CollapseOperatorSet) -> DMatrix<Complex64> {
    let f = ops.dft();
    f.adjoint() * rho * f
}

/// Evolve `rho0` to `t_final` with step `≤ grid.dt`. No kinetic term.
pub fn master_evolve(rho0: &DensityMatrixGrid, ops: &CollapseOperatorSet, t_final: f64) -> Result<DensityMatrixGrid> {
    master_evolve_observed(rho0, ops, t_final, 0.0).map(|run| run.rho)
}

/// As [`master_evolve`], with an optional kinetic term `H = κ k²` and the
/// invariant diagnostics.
pub fn master_evolve_observed(
    rho0: &DensityMatrixGrid,
    ops: &CollapseOperatorSet,
    t_final: f64,
    kinetic: f64,
) -> Result<MasterRun> {
    let n = ops.grid().n_points();
    if rho0.matrix().nrows() != n {
        return Err(Error::Invalid("density matrix size differs from the grid"));
    }
    if !(t_final >= 0.0) || t_final.is_infinite() {
        return Err(Error::domain("t_final", t_final, "t_final >= 0"));
    }
    let steps = (t_final / ops.grid().dt()).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let trace0 = rho0.trace();
    let mut rho = to_momentum(rho0.matrix(), ops);
    let h = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5 * dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    for _ in 0..steps {
        let k1 = rhs(&rho, ops, kinetic);
        let k2 = rhs(&(&rho + &k1 * half), ops, kinetic);
        let k3 = rhs(&(&rho + &k2 * half), ops, kinetic);
        let k4 = rhs(&(&rho + &k3 * h), ops, kinetic);
        rho += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;
    }
    let rho = DensityMatrixGrid::from_matrix(to_position(&rho, ops))?;
    let min_eigenvalue = rho.min_eigenvalue();
    if min_eigenvalue < -POSITIVITY_TOLERANCE * trace0.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Positivity(min_eigenvalue));
    }
    Ok(MasterRun {
        trace_drift: rho.trace() - trace0,
        hermiticity_error: rho.hermiticity_error(),
        min_eigenvalue,
        rho,
        steps,
        dt,
    })
}

/// Decay rate of `|ρ(x_L, x_R)|` over `[0, t]` for a two-packet state,
/// sampled at the lattice sites nearest the packet centres.
pub fn offdiagonal_decay_rate(state: &TwoPacketState, ops: &CollapseOperatorSet, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("t", t, "t > 0"));
    }
    let grid = ops.grid();
    let psi = StateVector::two_packet(grid, state)?;
    let rho0 = DensityMatrixGrid::pure(&psi);
    let rho = master_evolve(&rho0, ops, t)?;
    let site = |x: f64| {
        (0..grid.n_points())
            .min_by(|&i, &j| {
                grid.min_image(grid.position(i), x)
                    .abs()
                    .total_cmp(&grid.min_image(grid.position(j), x).abs())
            })
            .unwrap_or(0)
    };
    let (l, r) = (site(-0.5 * state.separation()), site(0.5 * state.separation()));
    let before = rho0.matrix()[(l, r)].norm();
    let after = rho.matrix()[(l, r)].norm();
    Ok(-log(after / before) / t)
}
