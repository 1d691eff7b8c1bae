use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

/// Reference distributions with exact quantile and distribution functions.
/// They cover the full line (normal, logistic), a half line (exponential)
/// and compact support (uniform).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestDistribution {
    Normal,
    Logistic,
    Exponential,
    Uniform,
}

impl TestDistribution {
    pub const ALL: [TestDistribution; 4] = [Self::Normal, Self::Logistic, Self::Exponential, Self::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Logistic => "logistic",
            Self::Exponential => "exponential",
            Self::Uniform => "uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    fn standard_normal() -> Normal {
        Normal::new(0.0, 1.0).expect("valid parameters")
    }

    pub fn quantile(self, p: f64) -> f64 {
        match self {
            Self::Normal => Self::standard_normal().inverse_cdf(p),
            Self::Logistic => (p / (1.0 - p)).ln(),
            Self::Exponential => -(-p).ln_1p(),
            Self::Uniform => p,
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Self::Normal => Self::standard_normal().cdf(x),
            Self::Logistic => 1.0 / (1.0 + (-x).exp()),
            Self::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            Self::Uniform => x.clamp(0.0, 1.0),
        }
    }

    /// `n` independent draws, reproducible for a given seed.
    pub fn sample(self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| match self {
                Self::Normal => StandardNormal.sample(&mut rng),
                Self::Logistic => {
                    let u: f64 = rng.sample(Open01);
                    (u / (1.0 - u)).ln()
                }
                Self::Exponential => Exp1.sample(&mut rng),
                Self::Uniform => rng.gen(),
            })
            .collect()
    }
}
