//! One-mode gauge-covariant bosonic Gaussian channels on truncated Fock
//! spaces, together with the majorization machinery used to certify that
//! passive inputs give the least noisy outputs.
//!
//! - [`fock`]: ladder operators, eigendecomposition, norms, state constructors.
//! - [`channels`]: attenuator, amplifier and general `(lambda, N)` channels,
//!   their duals, and the Lindblad semigroup.
//! - [`majorization`]: partial-sum majorization, Fock rearrangement, passivity.
//! - [`thinning`]: the classical thinning channel.
//! - [`entropy`]: von Neumann, Renyi and Shannon entropies.
//! - [`harness`]: randomized certification runs.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod harness;
pub mod majorization;
pub mod thinning;

pub use channels::{
    apply_amplifier, apply_attenuator, apply_gauge_covariant, attenuator_kraus, dual_apply,
    evolve_lindblad, lindblad_apply, Channel, ChannelOutput, GaugeCovariantParams, KrausSet,
};
pub use error::{Error, Result};
pub use fock::{
    annihilation, char_function, creation, displacement, eigh, hs_norm, number, random_density,
    spectrum, thermal_state, trace_distance, trace_norm, DensityMatrix, FockOperator, Spectrum,
};
pub use majorization::{
    decreasing_rearrangement, fock_rearrangement, is_passive, ky_fan_check, passive_projector,
    weakly_submajorizes, MajorizationReport,
};
pub use thinning::{thin, thinning_kernel, ClassicalDist, ThinningKernel};

pub use num_complex::Complex64;
