//! One-dimensional low-discrepancy points.
//!
//! In one dimension the Sobol sequence is the base-2 van der Corput
//! sequence (up to ordering within each block of `2^m` points), so that is
//! what is generated here.

/// The `i`-th element of the base-2 van der Corput sequence.
pub fn van_der_corput(i: u64) -> f64 {
    i.reverse_bits() as f64 / 2f64.powi(64)
}

/// `count` points in (0, 1): the first `count` sequence elements shifted by
/// half the finest spacing so that no point sits on 0.
pub fn unit_points(count: usize) -> Vec<f64> {
    let shift = 0.5 / count.next_power_of_two() as f64;
    (0..count as u64).map(|i| van_der_corput(i) + shift).collect()
}
