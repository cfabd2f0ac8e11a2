//! Numerical laboratory for the quasirelativistic continuous spontaneous
//! localization (QRCSL) collapse model and its comparison models: the
//! nonrelativistic CSL model and the tachyonic relativistic RCSL model.
//!
//! The crate is `no_std` (it needs `alloc`). Every routine is a pure function
//! of its inputs; randomness is derived from explicit seeds so that serial and
//! parallel drivers reproduce identical results. IO, configuration files and
//! threading live in the companion `qrcsl-lab` crate.
//!
//! Internal units: ħ = c = 1 with lengths measured in the collapse length `a`
//! and momenta in `1/a`. Every dimensionless kernel depends on `μ = M·a` only;
//! conversion to physical units happens in [`ModelParams`].
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is how NaN inputs get rejected alongside nonpositive ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod constants;
mod error;
pub mod excitation;
pub mod free_rates;
pub mod kernels;
pub mod numerics;
mod params;
pub mod trajectories;

pub use error::{Error, Result};
pub use params::{ModelParams, ModelVariant};
