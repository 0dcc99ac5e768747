//! Block-sparsity measures and their estimation from random projections.
//!
//! The soft block-sparsity measure `k_alpha(x)` is the exponential of the
//! Rényi entropy of the distribution of block energies. This crate computes
//! it exactly ([`signal`]) and estimates it from noisy linear measurements
//! whose rows are built from isotropic symmetric stable vectors
//! ([`stable`], [`measurement`], [`estimate`]). [`experiments`] runs seeded
//! Monte Carlo studies of the estimators and [`io`] handles file formats.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod experiments;
pub mod io;
pub mod measurement;
pub mod noise;
pub mod rng;
pub mod signal;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
pub use estimate::{
    combine_sparsity, empirical_cf, estimate_block_sparsity, estimate_norm, norm_ci, pilot_t,
    recovery_error_bound, theoretical_constants, theta, v_hat, v_hat_from_cf, NormEstimate,
    ReferenceLaw, SparsityEstimate, TheoreticalConstants,
};
pub use experiments::{ExperimentConfig, StudyResult};
pub use io::{read_signal, write_signal, EstimateReport, SignalFormat};
pub use measurement::{project, project_materialized, MeasurementSet};
pub use noise::{eta0_for, NoiseFamily, NoiseModel};
pub use rng::RandomStream;
pub use signal::{
    bdnr, block_distribution, block_l0, block_sparsity, l20_approx_bound, make_exact_signal,
    make_nearly_sparse_signal, make_stepped_signal, mixed_norm, BlockLayout, BlockSignal,
};
pub use stable::{sample_isotropic_vector, sample_positive_stable, sample_sas, StableSpec};
