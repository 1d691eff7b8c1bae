//! Simulation studies measuring how well the Hermite sketches recover
//! quantiles and rank correlations.
//!
//! Every study is seeded. Replications run in parallel, and results come
//! back in a fixed order, so a given seed always produces the same numbers.

pub mod correlation;
pub mod distributions;
pub mod iae;
pub mod qmc;
pub mod study;

pub use correlation::{sample_bivariate_normal, sample_spearman};
pub use distributions::TestDistribution;
pub use iae::{iae_measures, IaeMeasures, QuantileSource};
pub use study::{
    correlation_mae_study, quantile_iae_study, CorrelationStudy, CorrelationSummary, QuantileStudyRow, RhoRow,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Sketch(#[from] hermite_sketch::Error),
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

/// Derives an independent seed for one replication of one study cell.
pub fn replication_seed(base: u64, cell: u64, replication: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(base) ^ cell) ^ replication)
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
