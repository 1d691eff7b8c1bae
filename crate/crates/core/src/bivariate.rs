//! Bivariate Hermite series estimator with Spearman and Kendall estimates.
//!
//! Besides the joint coefficient matrix `A[k][j] = mean_i h_k(x_i) h_j(y_i)`
//! the sketch carries the two marginal coefficient vectors, which the
//! Spearman estimator needs over the same stream and standardization.

use crate::basis::{check_order, fill_hermite_functions, fill_lower_integrals, BasisTables, MAX_ORDER};
use crate::error::{check_finite, Error, Result};
use crate::moments::{check_lambda, RunningMoments};
use crate::univariate::{clip_cdf, clip_pdf, dot, DEFAULT_ORDER};

type Scratch = [f64; MAX_ORDER + 1];

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSketch {
    order_n: usize,
    standardize: bool,
    lambda: Option<f64>,
    /// Row-major `(N+1) x (N+1)`; rows index the x basis.
    coeff_matrix: Vec<f64>,
    marginal_x: Vec<f64>,
    marginal_y: Vec<f64>,
    moments_x: RunningMoments,
    moments_y: RunningMoments,
    obs_count: u64,
}

impl Default for BivariateSketch {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER, true, None).expect("default configuration is valid")
    }
}

/// Raw state of a bivariate sketch, used to rebuild one from storage.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateParts {
    pub order_n: usize,
    pub standardize: bool,
    pub lambda: Option<f64>,
    pub coeff_matrix: Vec<f64>,
    pub marginal_x: Vec<f64>,
    pub marginal_y: Vec<f64>,
    pub moments_x: RunningMoments,
    pub moments_y: RunningMoments,
    pub obs_count: u64,
}

impl BivariateSketch {
    pub fn new(order_n: usize, standardize: bool, lambda: Option<f64>) -> Result<Self> {
        check_order(order_n)?;
        let moments = match lambda {
            Some(l) => {
                check_lambda(l)?;
                RunningMoments::exponential(l)?
            }
            None => RunningMoments::cumulative(),
        };
        let dim = order_n + 1;
        Ok(Self {
            order_n,
            standardize,
            lambda,
            coeff_matrix: vec![0.0; dim * dim],
            marginal_x: vec![0.0; dim],
            marginal_y: vec![0.0; dim],
            moments_x: moments,
            moments_y: moments,
            obs_count: 0,
        })
    }

    pub fn from_parts(parts: BivariateParts) -> Result<Self> {
        let mut s = Self::new(parts.order_n, parts.standardize, parts.lambda)?;
        let dim = s.dim();
        if parts.coeff_matrix.len() != dim * dim || parts.marginal_x.len() != dim || parts.marginal_y.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "coefficient arrays do not match order {}",
                parts.order_n
            )));
        }
        for &v in parts
            .coeff_matrix
            .iter()
            .chain(&parts.marginal_x)
            .chain(&parts.marginal_y)
        {
            check_finite(v)?;
        }
        let mode = s.moments_x.mode();
        if parts.moments_x.mode() != mode || parts.moments_y.mode() != mode {
            return Err(Error::InvalidParameter("moment mode does not match lambda".into()));
        }
        s.coeff_matrix = parts.coeff_matrix;
        s.marginal_x = parts.marginal_x;
        s.marginal_y = parts.marginal_y;
        s.moments_x = parts.moments_x;
        s.moments_y = parts.moments_y;
        s.obs_count = parts.obs_count;
        Ok(s)
    }

    pub fn into_parts(self) -> BivariateParts {
        BivariateParts {
            order_n: self.order_n,
            standardize: self.standardize,
            lambda: self.lambda,
            coeff_matrix: self.coeff_matrix,
            marginal_x: self.marginal_x,
            marginal_y: self.marginal_y,
            moments_x: self.moments_x,
            moments_y: self.moments_y,
            obs_count: self.obs_count,
        }
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

    pub fn is_stationary(&self) -> bool {
        self.lambda.is_none()
    }

    pub fn coeff_matrix(&self) -> &[f64] {
        &self.coeff_matrix
    }

    pub fn coeff(&self, k: usize, j: usize) -> f64 {
        self.coeff_matrix[k * self.dim() + j]
    }

    pub fn marginal_x(&self) -> &[f64] {
        &self.marginal_x
    }

    pub fn marginal_y(&self) -> &[f64] {
        &self.marginal_y
    }

    pub fn moments_x(&self) -> &RunningMoments {
        &self.moments_x
    }

    pub fn moments_y(&self) -> &RunningMoments {
        &self.moments_y
    }

    pub fn obs_count(&self) -> u64 {
        self.obs_count
    }

    fn dim(&self) -> usize {
        self.order_n + 1
    }

    fn standard_x(&self, x: f64) -> f64 {
        if self.standardize {
            self.moments_x.standardize(x)
        } else {
            x
        }
    }

    fn standard_y(&self, y: f64) -> f64 {
        if self.standardize {
            self.moments_y.standardize(y)
        } else {
            y
        }
    }

    pub fn update_sequential(&mut self, x: f64, y: f64) -> Result<()> {
        check_finite(x)?;
        check_finite(y)?;
        self.moments_x.update(x)?;
        self.moments_y.update(y)?;
        let dim = self.dim();
        let mut hx: Scratch = [0.0; MAX_ORDER + 1];
        let mut hy: Scratch = [0.0; MAX_ORDER + 1];
        let (hx, hy) = (&mut hx[..dim], &mut hy[..dim]);
        fill_hermite_functions(self.standard_x(x), hx);
        fill_hermite_functions(self.standard_y(y), hy);
        self.obs_count += 1;

        let i = self.obs_count as f64;
        let blend = |old: f64, new: f64| match self.lambda {
            _ if i == 1.0 => new,
            None => ((i - 1.0) * old + new) / i,
            Some(lambda) => (1.0 - lambda) * old + lambda * new,
        };
        for (k, row) in self.coeff_matrix.chunks_exact_mut(dim).enumerate() {
            for (a, &hyj) in row.iter_mut().zip(hy.iter()) {
                *a = blend(*a, hx[k] * hyj);
            }
        }
        for (a, &h) in self.marginal_x.iter_mut().zip(hx.iter()) {
            *a = blend(*a, h);
        }
        for (a, &h) in self.marginal_y.iter_mut().zip(hy.iter()) {
            *a = blend(*a, h);
        }
        Ok(())
    }

    /// Batch update; standardization uses the moments after the batch.
    pub fn update_batch(&mut self, pairs: &[[f64; 2]]) -> Result<()> {
        if !self.is_stationary() {
            return Err(Error::ExponentialBatch);
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
        let bx = RunningMoments::from_slice(&xs)?;
        let by = RunningMoments::from_slice(&ys)?;
        self.moments_x.combine(&bx)?;
        self.moments_y.combine(&by)?;

        let dim = self.dim();
        let mut sum_matrix = vec![0.0; dim * dim];
        let mut sum_x = vec![0.0; dim];
        let mut sum_y = vec![0.0; dim];
        let mut hx: Scratch = [0.0; MAX_ORDER + 1];
        let mut hy: Scratch = [0.0; MAX_ORDER + 1];
        let (hx, hy) = (&mut hx[..dim], &mut hy[..dim]);
        for (&x, &y) in xs.iter().zip(&ys) {
            fill_hermite_functions(self.standard_x(x), hx);
            fill_hermite_functions(self.standard_y(y), hy);
            for (k, row) in sum_matrix.chunks_exact_mut(dim).enumerate() {
                let hxk = hx[k];
                for (s, &hyj) in row.iter_mut().zip(hy.iter()) {
                    *s += hxk * hyj;
                }
            }
            for (s, &h) in sum_x.iter_mut().zip(hx.iter()) {
                *s += h;
            }
            for (s, &h) in sum_y.iter_mut().zip(hy.iter()) {
                *s += h;
            }
        }
        let prior = self.obs_count as f64;
        let total = prior + pairs.len() as f64;
        let fold = |dst: &mut [f64], src: &[f64]| {
            for (a, s) in dst.iter_mut().zip(src) {
                *a = (prior * *a + s) / total;
            }
        };
        fold(&mut self.coeff_matrix, &sum_matrix);
        fold(&mut self.marginal_x, &sum_x);
        fold(&mut self.marginal_y, &sum_y);
        self.obs_count += pairs.len() as u64;
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

    /// `sum_kj A[k][j] u_k v_j`.
    fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.coeff_matrix
            .chunks_exact(self.dim())
            .zip(u)
            .map(|(row, &uk)| uk * dot(row, v))
            .sum()
    }

    pub fn pdf(&self, points: &[[f64; 2]], clipped: bool) -> Result<Vec<f64>> {
        self.require(1)?;
        let dim = self.dim();
        let scale = if self.standardize {
            self.moments_x.scale() * self.moments_y.scale()
        } else {
            1.0
        };
        let mut hx: Scratch = [0.0; MAX_ORDER + 1];
        let mut hy: Scratch = [0.0; MAX_ORDER + 1];
        points
            .iter()
            .map(|&[x, y]| {
                check_finite(x)?;
                check_finite(y)?;
                fill_hermite_functions(self.standard_x(x), &mut hx[..dim]);
                fill_hermite_functions(self.standard_y(y), &mut hy[..dim]);
                let v = self.bilinear(&hx[..dim], &hy[..dim]) / scale;
                Ok(if clipped { clip_pdf(v) } else { v })
            })
            .collect()
    }

    pub fn cdf(&self, points: &[[f64; 2]], clipped: bool) -> Result<Vec<f64>> {
        self.require(1)?;
        let dim = self.dim();
        let mut h: Scratch = [0.0; MAX_ORDER + 1];
        let mut lx: Scratch = [0.0; MAX_ORDER + 1];
        let mut ly: Scratch = [0.0; MAX_ORDER + 1];
        points
            .iter()
            .map(|&[x, y]| {
                check_finite(x)?;
                check_finite(y)?;
                let u = self.standard_x(x);
                fill_hermite_functions(u, &mut h[..dim]);
                fill_lower_integrals(u, &h[..dim], &mut lx[..dim]);
                let v = self.standard_y(y);
                fill_hermite_functions(v, &mut h[..dim]);
                fill_lower_integrals(v, &h[..dim], &mut ly[..dim]);
                let c = self.bilinear(&lx[..dim], &ly[..dim]);
                Ok(if clipped { clip_cdf(c) } else { c })
            })
            .collect()
    }

    /// Spearman's rho, clamped to [-1, 1].
    pub fn spearman(&self) -> Result<f64> {
        Ok(self.spearman_unclamped()?.clamp(-1.0, 1.0))
    }

    /// `12 (W a_x - z/2)^T A (W a_y - z/2)`, which expands to the four-term
    /// bilinear form in `W`, `z`, `A` and the marginal coefficients.
    pub fn spearman_unclamped(&self) -> Result<f64> {
        self.require(2)?;
        let tables = BasisTables::for_order(self.order_n)?;
        let z = tables.z_vector();
        let u = centered_cdf_moments(&tables, &self.marginal_x, z);
        let v = centered_cdf_moments(&tables, &self.marginal_y, z);
        Ok(12.0 * self.bilinear(&u, &v))
    }

    /// Kendall's tau, clamped to [-1, 1].
    pub fn kendall(&self) -> Result<f64> {
        Ok(self.kendall_unclamped()?.clamp(-1.0, 1.0))
    }

    /// `4 <A, W A W^T>_F - 1`.
    pub fn kendall_unclamped(&self) -> Result<f64> {
        self.require(2)?;
        let tables = BasisTables::for_order(self.order_n)?;
        let dim = self.dim();
        let w = tables.w_matrix();
        let a = &self.coeff_matrix;
        // b = W A
        let mut b = vec![0.0; dim * dim];
        for k in 0..dim {
            let brow = &mut b[k * dim..(k + 1) * dim];
            for l in 0..dim {
                let wkl = w[k * dim + l];
                if wkl == 0.0 {
                    continue;
                }
                for (bkj, &alj) in brow.iter_mut().zip(&a[l * dim..(l + 1) * dim]) {
                    *bkj += wkl * alj;
                }
            }
        }
        // <A, B W^T> = sum_kj A_kj sum_m B_km W_jm
        let mut total = 0.0;
        for k in 0..dim {
            let brow = &b[k * dim..(k + 1) * dim];
            for j in 0..dim {
                total += a[k * dim + j] * dot(brow, &w[j * dim..(j + 1) * dim]);
            }
        }
        Ok(4.0 * total - 1.0)
    }
}

/// `W a - z / 2`: per basis function, the integral of `h_k` against the
/// centered marginal distribution function.
fn centered_cdf_moments(tables: &BasisTables, a: &[f64], z: &[f64]) -> Vec<f64> {
    let dim = a.len();
    tables
        .w_matrix()
        .chunks_exact(dim)
        .zip(z)
        .map(|(row, &zk)| dot(row, a) - 0.5 * zk)
        .collect()
}
