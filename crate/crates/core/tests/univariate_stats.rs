use hermite_sketch::basis::hermite_function_values;
use hermite_sketch::{BasisTables, Error, QuantileAlgorithm, QueryOptions, UnivariateSketch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

fn normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn logistic(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            (u / (1.0 - u)).ln()
        })
        .collect()
}

fn sketch(order: usize, standardize: bool, xs: &[f64]) -> UnivariateSketch {
    let mut s = UnivariateSketch::new(order, standardize, None).unwrap();
    s.update_batch(xs).unwrap();
    s
}

#[test]
fn first_update_stores_basis_values() {
    let mut s = UnivariateSketch::new(30, false, None).unwrap();
    assert!(s.coeffs().iter().all(|&a| a == 0.0) && s.coeffs().len() == 31);
    s.update_sequential(0.4).unwrap();
    assert_eq!(s.coeffs(), hermite_function_values(0.4, 30).unwrap().as_slice());

    let mut b = UnivariateSketch::new(30, true, None).unwrap();
    b.update_batch(&[0.4]).unwrap();
    let mut q = UnivariateSketch::new(30, true, None).unwrap();
    q.update_sequential(0.4).unwrap();
    assert_eq!(b.coeffs(), q.coeffs());
}

#[test]
fn full_forgetting_keeps_only_last_point() {
    let mut s = UnivariateSketch::new(10, false, Some(1.0)).unwrap();
    s.update_sequential(3.0).unwrap();
    s.update_sequential(-1.2).unwrap();
    assert_eq!(s.coeffs(), hermite_function_values(-1.2, 10).unwrap().as_slice());
    assert_eq!(s.update_batch(&[1.0]), Err(Error::ExponentialBatch));
}

#[test]
fn batches_compose() {
    let xs = [0.3, -1.1, 2.5, 0.0, 4.2];
    let mut split = UnivariateSketch::new(16, false, None).unwrap();
    split.update_batch(&xs[..3]).unwrap();
    split.update_batch(&xs[3..]).unwrap();
    let whole = sketch(16, false, &xs);
    for (a, b) in split.coeffs().iter().zip(whole.coeffs()) {
        assert!((a - b).abs() < 1e-14);
    }
    let before = split.clone();
    assert!(split.update_batch(&[1.0, f64::NAN]).is_err());
    assert!(split.update_sequential(f64::INFINITY).is_err());
    assert_eq!(split, before);
}

#[test]
fn empty_sketch_queries_fail() {
    let s = UnivariateSketch::new(30, true, None).unwrap();
    assert!(s.pdf(&[0.0], false).is_err());
    assert!(s.cdf(&[0.0], false).is_err());
    let one = sketch(30, true, &[1.0]);
    assert!(one.quantiles(&[0.5], QuantileAlgorithm::Interpolate, true).is_err());
    let two = sketch(30, true, &[1.0, 2.0]);
    assert!(two.quantiles(&[0.0], QuantileAlgorithm::Interpolate, true).is_err());
    assert!(two.quantiles(&[1.0], QuantileAlgorithm::Bisection, true).is_err());
}

#[test]
fn normal_density_and_distribution() {
    let xs = normal(100_000, 5);
    let s = sketch(30, true, &xs);
    let pdf0 = s.pdf(&[0.0], false).unwrap()[0];
    assert!((pdf0 - 1.0 / (2.0 * PI).sqrt()).abs() < 0.02, "pdf(0) = {pdf0}");

    let raw = sketch(30, false, &xs);
    let cdf0 = raw.cdf(&[0.0], false).unwrap()[0];
    assert!((cdf0 - 0.5).abs() < 0.01, "cdf(0) = {cdf0}");

    assert_eq!(s.cdf(&[-30.0], true).unwrap()[0], 0.0);
    assert_eq!(s.cdf(&[30.0], true).unwrap()[0], 1.0);
    assert!(s.pdf(&[-30.0, 30.0], true).unwrap().iter().all(|&p| p >= 1e-8));
}

#[test]
fn logistic_distribution_function() {
    let s = sketch(30, true, &logistic(100_000, 6));
    let got = s.cdf(&[2.0], false).unwrap()[0];
    let want = 1.0 / (1.0 + (-2.0f64).exp());
    assert!((got - want).abs() < 0.01, "cdf(2) = {got}, want {want}");
}

#[test]
fn quantile_form_agrees_with_plain_form() {
    let s = sketch(30, true, &logistic(100_000, 7));
    let sd = s.moments().std_dev();
    let mean = s.moments().mean();
    let tail = s.cdf_quantform(mean + 8.0 * sd, 2).unwrap();
    assert!((tail - 1.0).abs() < 1e-3);
    for i in 0..=40 {
        let x = -6.0 + 0.3 * i as f64;
        let a = s.cdf_quantform(x, 2).unwrap();
        let b = s.cdf(&[x], false).unwrap()[0];
        assert!((a - b).abs() < 2e-2, "x = {x}: {a} vs {b}");
    }
}

/// The two branches meet at the origin only up to the truncation defect
/// `1 - sum_k a_k z_k`, which vanishes as the order grows.
#[test]
fn branch_gap_equals_mass_defect() {
    let s = sketch(30, true, &normal(100_000, 8));
    let z = BasisTables::for_order(30).unwrap().z_vector().to_vec();
    let (lower, upper) = s.quantform_branches(0.0, 0).unwrap();
    let defect = 1.0 - s.coeffs().iter().zip(&z).map(|(a, z)| a * z).sum::<f64>();
    assert!(((upper - lower) - defect).abs() < 1e-12);
    assert!(defect.abs() < 5e-3, "defect {defect}");
}

#[test]
fn normal_quantiles() {
    let s = sketch(30, true, &normal(100_000, 9));
    let ps = [0.1, 0.25, 0.5, 0.75, 0.9];
    let interp = s.quantiles(&ps, QuantileAlgorithm::Interpolate, true).unwrap();
    let bisect = s.quantiles(&ps, QuantileAlgorithm::Bisection, true).unwrap();
    assert!(interp[2].abs() < 0.02, "median {}", interp[2]);
    for (a, b) in interp.iter().zip(&bisect) {
        assert!((a - b).abs() < 0.02, "{a} vs {b}");
    }
}

#[test]
fn small_logistic_sketch_qq() {
    let s = {
        let mut s = UnivariateSketch::new(10, true, None).unwrap();
        s.update_batch(&logistic(2_000, 10)).unwrap();
        s
    };
    let ps: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
    let q = s.quantiles(&ps, QuantileAlgorithm::Interpolate, true).unwrap();
    for (p, qhat) in ps.iter().zip(&q) {
        let truth = (p / (1.0 - p)).ln();
        assert!((qhat - truth).abs() < 0.25, "p = {p}: {qhat} vs {truth}");
    }
    let half = sketch(10, true, &logistic(1_000, 11));
    assert!(half.pdf(&[0.0], true).unwrap()[0] > 0.0);
}

#[test]
fn acceleration_can_be_switched_off() {
    let s = sketch(30, true, &normal(5_000, 12));
    let plain = s
        .pdf_with(
            &[0.5],
            QueryOptions {
                clipped: false,
                acceleration_rounds: 0,
            },
        )
        .unwrap()[0];
    let sd = s.moments().std_dev();
    let u = s.to_standard(0.5);
    let direct: f64 = s
        .coeffs()
        .iter()
        .zip(hermite_function_values(u, 30).unwrap())
        .map(|(a, h)| a * h)
        .sum::<f64>()
        / sd;
    assert!((plain - direct).abs() < 1e-14);
}
