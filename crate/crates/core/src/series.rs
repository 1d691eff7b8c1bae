//! Iterated averaging of truncated-series partial sums.
//!
//! One round replaces each partial sum `S_k` by `(S_k + S_{k+1}) / 2`.
//! After `d` rounds the last element is a binomially weighted average of
//! `S_{N-d}, ..., S_N`, which damps the oscillating tail of a truncated
//! Hermite expansion.

use crate::error::{Error, Result};

/// Number of averaging rounds used when acceleration is on.
pub const DEFAULT_ROUNDS: usize = 2;

/// Applies `rounds` rounds of pairwise averaging to the partial sums and
/// returns the final element. With `rounds == 0` this is the last partial
/// sum. Rounds are capped at `partials.len() - 1`.
pub fn accelerate_partial_sums(partials: &[f64], rounds: usize) -> Result<f64> {
    if partials.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d = rounds.min(partials.len() - 1);
    let mut tail = partials[partials.len() - 1 - d..].to_vec();
    for r in 0..d {
        for i in 0..tail.len() - 1 - r {
            tail[i] = 0.5 * (tail[i] + tail[i + 1]);
        }
    }
    Ok(tail[0])
}

/// Per-term weights equivalent to [`accelerate_partial_sums`]: for terms
/// `t_k` with partial sums `S_k`, the accelerated value equals
/// `sum_k weights[k] * t_k`.
pub fn term_weights(n_terms: usize, rounds: usize) -> Vec<f64> {
    let mut weights = vec![1.0; n_terms];
    if n_terms == 0 {
        return weights;
    }
    let d = rounds.min(n_terms - 1);
    if d == 0 {
        return weights;
    }
    // Binomial weight of S_{N-d+i} is C(d, i) / 2^d.
    let mut binom = vec![1.0f64; d + 1];
    for i in 1..=d {
        binom[i] = binom[i - 1] * (d - i + 1) as f64 / i as f64;
    }
    let scale = 0.5f64.powi(d as i32);
    let last = n_terms - 1;
    // Term k appears in every S_j with j >= k.
    for (offset, w) in weights[last + 1 - d..].iter_mut().enumerate() {
        let k = last + 1 - d + offset;
        *w = (0..=d).filter(|&i| last - d + i >= k).map(|i| binom[i] * scale).sum();
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rounds_is_last_partial() {
        assert_eq!(accelerate_partial_sums(&[1.0, 3.0, 2.5], 0).unwrap(), 2.5);
    }

    #[test]
    fn constant_is_fixed_point() {
        for d in 0..6 {
            assert_eq!(accelerate_partial_sums(&[0.7; 5], d).unwrap(), 0.7);
        }
    }

    #[test]
    fn alternating_tail_cancels_in_one_round() {
        let partials: Vec<f64> = (0..9).map(|k| 0.5 + if k % 2 == 0 { 0.125 } else { -0.125 }).collect();
        assert_eq!(accelerate_partial_sums(&partials, 1).unwrap(), 0.5);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(accelerate_partial_sums(&[], 2), Err(Error::EmptyInput));
    }

    #[test]
    fn weights_match_partial_sum_averaging() {
        let terms = [0.3, -1.2, 0.8, 0.05, -0.4, 0.9, 0.11];
        let partials: Vec<f64> = terms
            .iter()
            .scan(0.0, |s, t| {
                *s += t;
                Some(*s)
            })
            .collect();
        for d in 0..10 {
            let w = term_weights(terms.len(), d);
            let via_weights: f64 = w.iter().zip(&terms).map(|(a, b)| a * b).sum();
            let direct = accelerate_partial_sums(&partials, d).unwrap();
            assert!((via_weights - direct).abs() < 1e-14, "d = {d}");
        }
        assert_eq!(term_weights(5, 2), vec![1.0, 1.0, 1.0, 0.75, 0.25]);
    }
}
