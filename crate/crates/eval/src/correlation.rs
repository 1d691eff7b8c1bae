use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{EvalError, Result};

/// Standard bivariate normal pairs with correlation `rho`.
pub fn sample_bivariate_normal(n: usize, rho: f64, seed: u64) -> Result<Vec<[f64; 2]>> {
    if !(rho.abs() < 1.0) {
        return Err(EvalError::InvalidParameter(format!(
            "correlation {rho} outside (-1, 1)"
        )));
    }
    if n == 0 {
        return Err(EvalError::InvalidParameter("sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (1.0 - rho * rho).sqrt();
    Ok((0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            let z: f64 = StandardNormal.sample(&mut rng);
            [x, rho * x + c * z]
        })
        .collect())
}

/// 1-based ranks, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Sample Spearman coefficient: Pearson correlation of the ranks.
pub fn sample_spearman(pairs: &[[f64; 2]]) -> f64 {
    let xs: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    pearson(&average_ranks(&xs), &average_ranks(&ys))
}

/// Kendall's tau of a bivariate normal with correlation `rho`.
pub fn normal_kendall(rho: f64) -> f64 {
    2.0 / std::f64::consts::PI * rho.asin()
}
