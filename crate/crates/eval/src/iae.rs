use hermite_sketch::{QuantileAlgorithm, UnivariateSketch};

use crate::distributions::TestDistribution;
use crate::qmc::unit_points;
use crate::{EvalError, Result};

/// Lower and upper probability limits of the partial IAE.
pub const PARTIAL_RANGE: (f64, f64) = (0.01, 0.99);
pub const DEFAULT_QMC_POINTS: usize = 2048;
pub const MIN_QMC_POINTS: usize = 256;

/// Anything that can estimate a vector of quantiles.
pub trait QuantileSource {
    fn estimate_quantiles(&self, ps: &[f64]) -> Result<Vec<f64>>;
}

/// Interpolation with series acceleration, the standard evaluation protocol.
impl QuantileSource for UnivariateSketch {
    fn estimate_quantiles(&self, ps: &[f64]) -> Result<Vec<f64>> {
        Ok(self.quantiles(ps, QuantileAlgorithm::Interpolate, true)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaeMeasures {
    /// Integral of the absolute quantile error over (0, 1).
    pub iae: f64,
    /// The same integral restricted to [0.01, 0.99].
    pub piae: f64,
}

/// Quasi-Monte Carlo estimates of the integrated absolute quantile error.
pub fn iae_measures<S: QuantileSource + ?Sized>(
    source: &S,
    dist: TestDistribution,
    qmc_points: usize,
) -> Result<IaeMeasures> {
    if qmc_points < MIN_QMC_POINTS {
        return Err(EvalError::InvalidParameter(format!(
            "need at least {MIN_QMC_POINTS} quadrature points, got {qmc_points}"
        )));
    }
    let u = unit_points(qmc_points);
    let (lo, hi) = PARTIAL_RANGE;
    let partial: Vec<f64> = u.iter().map(|&t| lo + (hi - lo) * t).collect();
    let mean_error = |ps: &[f64]| -> Result<f64> {
        let est = source.estimate_quantiles(ps)?;
        Ok(est
            .iter()
            .zip(ps)
            .map(|(q, &p)| (q - dist.quantile(p)).abs())
            .sum::<f64>()
            / ps.len() as f64)
    };
    Ok(IaeMeasures {
        iae: mean_error(&u)?,
        piae: (hi - lo) * mean_error(&partial)?,
    })
}
