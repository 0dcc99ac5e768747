//! Seeded Monte Carlo studies of the block-sparsity estimators.
//!
//! Replication `r` of a study draws from `RandomStream::new(seed, 0).child(r)`;
//! its Cauchy and index-`alpha` measurement sets use children 1 and 2 of that
//! stream. Each replication draws the largest sample size of the grid once and
//! smaller grid points use prefixes, so curves share random numbers across the
//! grid and across swept parameters. Aggregates are computed over sorted
//! values, making every output independent of replication order and thread
//! count.

mod config;
mod output;
mod studies;

pub use config::{ExperimentConfig, SignalKind, Study, Sweep};
pub use output::{manifest, write_outputs};
pub use studies::{
    run, run_error_curve, run_l20_small_alpha, run_measure_compare, run_normality, ErrorCurveRow,
    L20Row, MeasureRow, NormalityCase, StatSummary, StudyResult, THEORY_SEED,
};
