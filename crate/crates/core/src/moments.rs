//! Online mean and standard deviation used to standardize observations.

use crate::error::{check_finite, Error, Result};

/// How the moments weight past observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentMode {
    /// Every observation weighted equally.
    Cumulative,
    /// Geometric forgetting with weight `lambda` on the newest observation.
    Exponential(f64),
}

/// Running moments in either cumulative or exponentially weighted form.
///
/// Cumulative mode keeps `(count, mean, m2)` with `m2` the sum of squared
/// deviations. Exponential mode keeps `ew_mean` and `ew_var`; `count` still
/// tracks the number of observations seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMoments {
    mode: MomentMode,
    count: u64,
    mean: f64,
    m2: f64,
    ew_mean: f64,
    ew_var: f64,
}

impl RunningMoments {
    pub fn cumulative() -> Self {
        Self::with_mode(MomentMode::Cumulative)
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self::with_mode(MomentMode::Exponential(lambda)))
    }

    fn with_mode(mode: MomentMode) -> Self {
        Self {
            mode,
            count: 0,
            mean: 0.0,
            m2: 0.0,
            ew_mean: 0.0,
            ew_var: 0.0,
        }
    }

    /// Rebuilds a state from its raw fields, as read back from a sketch file.
    pub fn from_parts(mode: MomentMode, count: u64, mean: f64, m2: f64, ew_mean: f64, ew_var: f64) -> Result<Self> {
        if let MomentMode::Exponential(lambda) = mode {
            check_lambda(lambda)?;
        }
        for v in [mean, m2, ew_mean, ew_var] {
            check_finite(v)?;
        }
        if m2 < 0.0 || ew_var < 0.0 {
            return Err(Error::InvalidParameter("negative second moment".into()));
        }
        Ok(Self {
            mode,
            count,
            mean,
            m2,
            ew_mean,
            ew_var,
        })
    }

    /// Moments of a slice computed in two passes.
    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        let mut out = Self::cumulative();
        if xs.is_empty() {
            return Ok(out);
        }
        for &x in xs {
            check_finite(x)?;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        out.count = xs.len() as u64;
        out.mean = mean;
        out.m2 = m2;
        Ok(out)
    }

    pub fn mode(&self) -> MomentMode {
        self.mode
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Raw cumulative fields `(mean, m2)`.
    pub fn cumulative_parts(&self) -> (f64, f64) {
        (self.mean, self.m2)
    }

    /// Raw exponential fields `(ew_mean, ew_var)`.
    pub fn exponential_parts(&self) -> (f64, f64) {
        (self.ew_mean, self.ew_var)
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        check_finite(x)?;
        self.count += 1;
        match self.mode {
            MomentMode::Cumulative => {
                let delta = x - self.mean;
                self.mean += delta / self.count as f64;
                self.m2 += delta * (x - self.mean);
            }
            MomentMode::Exponential(lambda) => {
                if self.count == 1 {
                    self.ew_mean = x;
                    self.ew_var = 0.0;
                } else {
                    let delta = x - self.ew_mean;
                    self.ew_mean = (1.0 - lambda) * self.ew_mean + lambda * x;
                    self.ew_var = (1.0 - lambda) * self.ew_var + lambda * delta * delta;
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self.mode {
            MomentMode::Cumulative => self.mean,
            MomentMode::Exponential(_) => self.ew_mean,
        }
    }

    /// Sample variance (cumulative) or the exponentially weighted variance.
    /// Zero while undefined.
    pub fn variance(&self) -> f64 {
        match self.mode {
            MomentMode::Cumulative if self.count >= 2 => self.m2 / (self.count - 1) as f64,
            MomentMode::Cumulative => 0.0,
            MomentMode::Exponential(_) => self.ew_var,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Scale used to standardize observations: the standard deviation, or
    /// 1 while it is undefined or zero.
    pub fn scale(&self) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 && sd.is_finite() {
            sd
        } else {
            1.0
        }
    }

    /// `(x - mean) / scale`.
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mean()) / self.scale()
    }

    /// Folds `other` into `self` with the pairwise combination rule.
    pub fn combine(&mut self, other: &Self) -> Result<()> {
        if self.mode != MomentMode::Cumulative || other.mode != MomentMode::Cumulative {
            return Err(Error::Incompatible(
                "exponentially weighted moments cannot be merged".into(),
            ));
        }
        if other.count == 0 {
            return Ok(());
        }
        if self.count == 0 {
            *self = *other;
            return Ok(());
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
        Ok(())
    }

    /// Left fold of [`RunningMoments::combine`] over a non-empty list.
    pub fn merge(states: &[Self]) -> Result<Self> {
        let (first, rest) = states.split_first().ok_or(Error::EmptyInput)?;
        let mut out = *first;
        if out.mode != MomentMode::Cumulative {
            return Err(Error::Incompatible(
                "exponentially weighted moments cannot be merged".into(),
            ));
        }
        for s in rest {
            out.combine(s)?;
        }
        Ok(out)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponential weight {lambda} must lie in (0, 1]"
        )))
    }
}
