//! Univariate Hermite series estimator.
//!
//! The state is the coefficient vector `a_k = mean_i h_k(x_i)` (or its
//! exponentially weighted analogue) plus running moments used to
//! standardize observations. Densities, distribution functions and
//! quantiles are all evaluated from that fixed-size state.

use crate::basis::{check_order, fill_hermite_functions, fill_lower_integrals, fill_upper_integrals, MAX_ORDER};
use crate::error::{check_finite, Error, Result};
use crate::moments::{check_lambda, RunningMoments};
use crate::series::{term_weights, DEFAULT_ROUNDS};

/// Default series order.
pub const DEFAULT_ORDER: usize = 30;

/// Densities below this value are raised to it when clipping.
pub const PDF_FLOOR: f64 = 1e-8;

/// Distribution-function values within this distance of 0 or 1 snap to the
/// bound when clipping.
pub const CDF_SNAP: f64 = 1e-10;

/// Standardized interpolation grid used by [`QuantileAlgorithm::Interpolate`].
pub const INTERPOLATION_RANGE: (f64, f64) = (-5.0, 5.0);
pub const INTERPOLATION_POINTS: usize = 1001;

/// Standardized bracket, tolerance and iteration cap for bisection.
pub const BISECTION_BRACKET: (f64, f64) = (-10.0, 10.0);
pub const BISECTION_TOLERANCE: f64 = 1e-10;
pub const BISECTION_MAX_ITER: usize = 200;

/// Options shared by density and distribution-function queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    pub clipped: bool,
    /// Rounds of partial-sum averaging; 0 evaluates the plain truncated series.
    pub acceleration_rounds: usize,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            clipped: false,
            acceleration_rounds: DEFAULT_ROUNDS,
        }
    }
}

impl QueryOptions {
    pub fn clipped(clipped: bool) -> Self {
        Self {
            clipped,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantileAlgorithm {
    /// Root finding on the distribution function, one bisection per probability.
    Bisection,
    /// Linear interpolation on a fixed standardized grid.
    #[default]
    Interpolate,
}

pub(crate) fn clip_pdf(v: f64) -> f64 {
    v.max(PDF_FLOOR)
}

pub(crate) fn clip_cdf(v: f64) -> f64 {
    if v < CDF_SNAP {
        0.0
    } else if v > 1.0 - CDF_SNAP {
        1.0
    } else {
        v
    }
}

type Scratch = [f64; MAX_ORDER + 1];

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSketch {
    order_n: usize,
    standardize: bool,
    lambda: Option<f64>,
    coeffs: Vec<f64>,
    moments: RunningMoments,
    obs_count: u64,
}

impl Default for UnivariateSketch {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER, true, None).expect("default configuration is valid")
    }
}

impl UnivariateSketch {
    /// An empty sketch. `lambda` selects exponential weighting.
    pub fn new(order_n: usize, standardize: bool, lambda: Option<f64>) -> Result<Self> {
        check_order(order_n)?;
        let moments = match lambda {
            Some(l) => {
                check_lambda(l)?;
                RunningMoments::exponential(l)?
            }
            None => RunningMoments::cumulative(),
        };
        Ok(Self {
            order_n,
            standardize,
            lambda,
            coeffs: vec![0.0; order_n + 1],
            moments,
            obs_count: 0,
        })
    }

    /// Reassembles a sketch from stored state.
    pub fn from_parts(
        order_n: usize,
        standardize: bool,
        lambda: Option<f64>,
        coeffs: Vec<f64>,
        moments: RunningMoments,
        obs_count: u64,
    ) -> Result<Self> {
        let mut s = Self::new(order_n, standardize, lambda)?;
        if coeffs.len() != order_n + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, found {}",
                order_n + 1,
                coeffs.len()
            )));
        }
        for &c in &coeffs {
            check_finite(c)?;
        }
        if moments.mode() != s.moments.mode() {
            return Err(Error::InvalidParameter("moment mode does not match lambda".into()));
        }
        s.coeffs = coeffs;
        s.moments = moments;
        s.obs_count = obs_count;
        Ok(s)
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn standardize(&self) -> bool {
        self.standardize
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn moments(&self) -> &RunningMoments {
        &self.moments
    }

    pub fn obs_count(&self) -> u64 {
        self.obs_count
    }

    pub fn is_stationary(&self) -> bool {
        self.lambda.is_none()
    }

    fn dim(&self) -> usize {
        self.order_n + 1
    }

    /// Maps an observation into the coordinates the coefficients live in.
    pub fn to_standard(&self, x: f64) -> f64 {
        if self.standardize {
            self.moments.standardize(x)
        } else {
            x
        }
    }

    /// Inverse of [`UnivariateSketch::to_standard`].
    pub fn from_standard(&self, u: f64) -> f64 {
        if self.standardize {
            self.moments.mean() + self.moments.scale() * u
        } else {
            u
        }
    }

    fn scale(&self) -> f64 {
        if self.standardize {
            self.moments.scale()
        } else {
            1.0
        }
    }

    pub fn update_sequential(&mut self, x: f64) -> Result<()> {
        check_finite(x)?;
        self.moments.update(x)?;
        let u = self.to_standard(x);
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let h = &mut h[..self.dim()];
        fill_hermite_functions(u, h);
        self.obs_count += 1;
        let i = self.obs_count as f64;
        match self.lambda {
            _ if self.obs_count == 1 => self.coeffs.copy_from_slice(h),
            None => {
                for (a, &hk) in self.coeffs.iter_mut().zip(h.iter()) {
                    *a = ((i - 1.0) * *a + hk) / i;
                }
            }
            Some(lambda) => {
                for (a, &hk) in self.coeffs.iter_mut().zip(h.iter()) {
                    *a = (1.0 - lambda) * *a + lambda * hk;
                }
            }
        }
        Ok(())
    }

    /// Adds a batch of observations. When standardizing, every point in the
    /// batch uses the moments after the whole batch has been absorbed.
    pub fn update_batch(&mut self, xs: &[f64]) -> Result<()> {
        if !self.is_stationary() {
            return Err(Error::ExponentialBatch);
        }
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let batch = RunningMoments::from_slice(xs)?;
        let mut merged = self.moments;
        merged.combine(&batch)?;
        self.moments = merged;

        let dim = self.dim();
        let mut sums = vec![0.0; dim];
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let h = &mut h[..dim];
        for &x in xs {
            fill_hermite_functions(self.to_standard(x), h);
            for (s, &hk) in sums.iter_mut().zip(h.iter()) {
                *s += hk;
            }
        }
        let prior = self.obs_count as f64;
        let nb = xs.len() as f64;
        let total = prior + nb;
        for (a, s) in self.coeffs.iter_mut().zip(&sums) {
            *a = (prior * *a + s) / total;
        }
        self.obs_count += xs.len() as u64;
        Ok(())
    }

    fn require(&self, need: u64) -> Result<()> {
        if self.obs_count < need {
            Err(Error::InsufficientObservations {
                have: self.obs_count,
                need,
            })
        } else {
            Ok(())
        }
    }

    fn weighted_coeffs(&self, rounds: usize) -> Vec<f64> {
        term_weights(self.dim(), rounds)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(w, a)| w * a)
            .collect()
    }

    /// Density estimate with default acceleration.
    pub fn pdf(&self, xs: &[f64], clipped: bool) -> Result<Vec<f64>> {
        self.pdf_with(xs, QueryOptions::clipped(clipped))
    }

    pub fn pdf_with(&self, xs: &[f64], opts: QueryOptions) -> Result<Vec<f64>> {
        self.require(1)?;
        let coeffs = self.weighted_coeffs(opts.acceleration_rounds);
        let scale = self.scale();
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let h = &mut h[..self.dim()];
        xs.iter()
            .map(|&x| {
                check_finite(x)?;
                fill_hermite_functions(self.to_standard(x), h);
                let v = dot(&coeffs, h) / scale;
                Ok(if opts.clipped { clip_pdf(v) } else { v })
            })
            .collect()
    }

    /// Distribution function from lower integrals of the basis.
    pub fn cdf(&self, xs: &[f64], clipped: bool) -> Result<Vec<f64>> {
        self.cdf_with(xs, QueryOptions::clipped(clipped))
    }

    pub fn cdf_with(&self, xs: &[f64], opts: QueryOptions) -> Result<Vec<f64>> {
        self.require(1)?;
        let coeffs = self.weighted_coeffs(opts.acceleration_rounds);
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let mut lower: Scratch = [0.0; MAX_ORDER + 1];
        let dim = self.dim();
        xs.iter()
            .map(|&x| {
                check_finite(x)?;
                let u = self.to_standard(x);
                fill_hermite_functions(u, &mut h[..dim]);
                fill_lower_integrals(u, &h[..dim], &mut lower[..dim]);
                let v = dot(&coeffs, &lower[..dim]);
                Ok(if opts.clipped { clip_cdf(v) } else { v })
            })
            .collect()
    }

    /// The distribution function used for quantile inversion: upper
    /// integrals for non-negative standardized arguments, lower integrals
    /// otherwise.
    pub fn cdf_quantform(&self, x: f64, acceleration_rounds: usize) -> Result<f64> {
        self.require(1)?;
        check_finite(x)?;
        let coeffs = self.weighted_coeffs(acceleration_rounds);
        Ok(self.quantform_standard(&coeffs, self.to_standard(x)))
    }

    pub(crate) fn quantform_standard(&self, coeffs: &[f64], u: f64) -> f64 {
        let dim = self.dim();
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let mut tail: Scratch = [0.0; MAX_ORDER + 1];
        fill_hermite_functions(u, &mut h[..dim]);
        if u >= 0.0 {
            fill_upper_integrals(u, &h[..dim], &mut tail[..dim]);
            1.0 - dot(coeffs, &tail[..dim])
        } else {
            fill_lower_integrals(u, &h[..dim], &mut tail[..dim]);
            dot(coeffs, &tail[..dim])
        }
    }

    /// Both branches of [`UnivariateSketch::cdf_quantform`] evaluated at a
    /// standardized point: `(lower branch, upper branch)`.
    pub fn quantform_branches(&self, u: f64, acceleration_rounds: usize) -> Result<(f64, f64)> {
        self.require(1)?;
        check_finite(u)?;
        let coeffs = self.weighted_coeffs(acceleration_rounds);
        let dim = self.dim();
        let mut h = vec![0.0; dim];
        let mut lower = vec![0.0; dim];
        let mut upper = vec![0.0; dim];
        fill_hermite_functions(u, &mut h);
        fill_lower_integrals(u, &h, &mut lower);
        fill_upper_integrals(u, &h, &mut upper);
        Ok((dot(&coeffs, &lower), 1.0 - dot(&coeffs, &upper)))
    }

    /// Quantile estimates for probabilities in (0, 1).
    pub fn quantiles(&self, ps: &[f64], algorithm: QuantileAlgorithm, accelerate: bool) -> Result<Vec<f64>> {
        self.require(2)?;
        for &p in ps {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
        }
        let rounds = if accelerate { DEFAULT_ROUNDS } else { 0 };
        let coeffs = self.weighted_coeffs(rounds);
        let standard = match algorithm {
            QuantileAlgorithm::Bisection => ps.iter().map(|&p| self.bisect(&coeffs, p)).collect::<Vec<_>>(),
            QuantileAlgorithm::Interpolate => self.interpolate(&coeffs, ps),
        };
        Ok(standard.into_iter().map(|u| self.from_standard(u)).collect())
    }

    fn bisect(&self, coeffs: &[f64], p: f64) -> f64 {
        let (mut lo, mut hi) = BISECTION_BRACKET;
        if self.quantform_standard(coeffs, lo) >= p {
            return lo;
        }
        if self.quantform_standard(coeffs, hi) <= p {
            return hi;
        }
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo < BISECTION_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.quantform_standard(coeffs, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn interpolate(&self, coeffs: &[f64], ps: &[f64]) -> Vec<f64> {
        let (a, b) = INTERPOLATION_RANGE;
        let step = (b - a) / (INTERPOLATION_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..INTERPOLATION_POINTS).map(|i| a + step * i as f64).collect();
        let mut running = f64::NEG_INFINITY;
        let cdf: Vec<f64> = grid
            .iter()
            .map(|&u| {
                running = running.max(self.quantform_standard(coeffs, u));
                running
            })
            .collect();
        ps.iter()
            .map(|&p| {
                let j = cdf.partition_point(|&c| c <= p);
                if j == 0 {
                    grid[0]
                } else if j == cdf.len() {
                    grid[cdf.len() - 1]
                } else {
                    let (c0, c1) = (cdf[j - 1], cdf[j]);
                    grid[j - 1] + (p - c0) / (c1 - c0) * step
                }
            })
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::hermite_function_values;

    #[test]
    fn construction() {
        let s = UnivariateSketch::new(30, true, None).unwrap();
        assert_eq!(s.coeffs(), &[0.0; 31][..]);
        assert_eq!(s.obs_count(), 0);
        assert_eq!(s, UnivariateSketch::default());
        let e = UnivariateSketch::new(10, false, Some(0.05)).unwrap();
        assert!(!e.is_stationary());
        assert!(UnivariateSketch::new(101, true, None).is_err());
        assert!(UnivariateSketch::new(10, true, Some(0.0)).is_err());
        assert!(UnivariateSketch::new(10, true, Some(1.01)).is_err());
    }

    #[test]
    fn first_update_is_basis_vector() {
        let mut s = UnivariateSketch::new(12, false, None).unwrap();
        s.update_sequential(0.4).unwrap();
        assert_eq!(s.coeffs(), &hermite_function_values(0.4, 12).unwrap()[..]);
    }

    #[test]
    fn full_forgetting_keeps_last() {
        let mut s = UnivariateSketch::new(8, false, Some(1.0)).unwrap();
        s.update_sequential(3.0).unwrap();
        s.update_sequential(-1.2).unwrap();
        assert_eq!(s.coeffs(), &hermite_function_values(-1.2, 8).unwrap()[..]);
    }

    #[test]
    fn sequential_matches_batch() {
        let mut a = UnivariateSketch::new(10, false, None).unwrap();
        let mut b = a.clone();
        for x in [0.1, 0.2, 0.3] {
            a.update_sequential(x).unwrap();
        }
        b.update_batch(&[0.1, 0.2, 0.3]).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn single_batch_matches_single_update_when_standardizing() {
        let mut a = UnivariateSketch::new(10, true, None).unwrap();
        let mut b = a.clone();
        a.update_sequential(2.5).unwrap();
        b.update_batch(&[2.5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_rejections() {
        let mut e = UnivariateSketch::new(10, true, Some(0.1)).unwrap();
        assert_eq!(e.update_batch(&[1.0]), Err(Error::ExponentialBatch));
        let mut s = UnivariateSketch::new(10, true, None).unwrap();
        assert_eq!(s.update_batch(&[]), Err(Error::EmptyInput));
        assert!(s.update_batch(&[1.0, f64::NAN]).is_err());
        assert!(s.update_sequential(f64::INFINITY).is_err());
        assert_eq!(s.obs_count(), 0);
        assert_eq!(s.coeffs(), &[0.0; 11][..]);
    }

    #[test]
    fn empty_queries_fail() {
        let s = UnivariateSketch::default();
        assert!(matches!(
            s.pdf(&[0.0], false),
            Err(Error::InsufficientObservations { .. })
        ));
        assert!(s.cdf(&[0.0], false).is_err());
        assert!(s.cdf_quantform(0.0, 2).is_err());
        let mut one = s.clone();
        one.update_sequential(1.0).unwrap();
        assert!(one.quantiles(&[0.5], QuantileAlgorithm::Bisection, true).is_err());
    }

    #[test]
    fn quantile_probability_checks() {
        let mut s = UnivariateSketch::default();
        s.update_batch(&[-1.0, 0.0, 1.0, 2.0]).unwrap();
        for p in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(s.quantiles(&[p], QuantileAlgorithm::Interpolate, true).is_err());
        }
    }

    #[test]
    fn clipping() {
        let mut s = UnivariateSketch::new(20, false, None).unwrap();
        s.update_batch(&[-0.5, 0.1, 0.2, 1.7]).unwrap();
        let xs: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.5).collect();
        assert!(s.pdf(&xs, true).unwrap().iter().all(|&v| v >= PDF_FLOOR));
        assert!(s.cdf(&xs, true).unwrap().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(s.cdf(&[-30.0], true).unwrap()[0], 0.0);
    }
}
