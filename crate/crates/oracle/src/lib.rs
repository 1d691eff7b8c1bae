//! Slow, independent reference computations for tests.
//!
//! Nothing here shares code with the estimator crate: Hermite functions come
//! from the explicit polynomial sum, integrals from adaptive Gauss-Kronrod or
//! plain trapezoid grids.

use std::f64::consts::PI;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `h_k(x)` from `H_k(x) = k! sum_m (-1)^m (2x)^(k-2m) / (m! (k-2m)!)`.
/// Exact factorials keep this accurate for `k <= 20`.
pub fn hermite_direct(k: u32, x: f64) -> f64 {
    let poly: f64 = (0..=k / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * (2.0 * x).powi((k - 2 * m) as i32) / (factorial(m) * factorial(k - 2 * m))
        })
        .sum::<f64>()
        * factorial(k);
    let norm = (2f64.powi(k as i32) * factorial(k) * PI.sqrt()).powf(-0.5);
    norm * (-0.5 * x * x).exp() * poly
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Weights of the embedded 7-point Gauss rule at the odd Kronrod nodes.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: (estimate, error estimate, integral of |f|).
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    let mut mass = KRONROD_WEIGHTS[7] * fc.abs();
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let (f1, f2) = (f(mid - dx), f(mid + dx));
        kronrod += KRONROD_WEIGHTS[i] * (f1 + f2);
        mass += KRONROD_WEIGHTS[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs(), mass * half)
}

/// Adaptive Gauss-Kronrod quadrature by recursive bisection. The returned
/// value is within about `tol` of the integral for smooth integrands.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    // Absolute error allowed per unit length once the halved tolerance has
    // sunk below what the integrand's own rounding noise permits.
    let floor_density = 1e-3 * tol / (b - a).abs().max(f64::MIN_POSITIVE);
    let recurse = |a: f64, b: f64, tol: f64| -> f64 {
        fn go<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, floor_density: f64, depth: u32) -> f64 {
            let (value, err, mass) = kronrod_panel(f, a, b);
            let floor = (1e-13 * mass).max(floor_density * (b - a).abs());
            if depth == 0 || err <= tol.max(floor) {
                return value;
            }
            let m = 0.5 * (a + b);
            go(f, a, m, 0.5 * tol, floor_density, depth - 1) + go(f, m, b, 0.5 * tol, floor_density, depth - 1)
        }
        go(f, a, b, tol, floor_density, 40)
    };
    recurse(a, b, tol)
}

/// Where the Hermite functions used in tests are negligible.
pub const TAIL: f64 = 30.0;

pub fn lower_integral(k: u32, x: f64) -> f64 {
    if x <= -TAIL {
        return 0.0;
    }
    integrate(&|t| hermite_direct(k, t), -TAIL, x, 1e-13)
}

pub fn upper_integral(k: u32, x: f64) -> f64 {
    if x >= TAIL {
        return 0.0;
    }
    integrate(&|t| hermite_direct(k, t), x, TAIL, 1e-13)
}

pub fn full_integral(k: u32) -> f64 {
    integrate(&|t| hermite_direct(k, t), -TAIL, TAIL, 1e-13)
}

/// `int h_k(u) int_{-inf}^{u} h_l(v) dv du` by nested adaptive quadrature.
pub fn w_entry(k: u32, l: u32) -> f64 {
    integrate(&|u| hermite_direct(k, u) * lower_integral(l, u), -12.0, 12.0, 1e-11)
}

/// Uniform grid over `[-half_width, half_width]`.
pub fn grid(half_width: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| -half_width + step * i as f64).collect()
}

/// Trapezoid rule over a uniform grid with values `ys`.
pub fn trapezoid(step: f64, ys: &[f64]) -> f64 {
    match ys {
        [] | [_] => 0.0,
        [first, .., last] => step * (ys.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

fn series(coeffs: &[f64], basis: impl Fn(u32) -> f64) -> f64 {
    coeffs.iter().enumerate().map(|(k, a)| a * basis(k as u32)).sum()
}

/// Direct 2-D integration of `12 int int (F_x - 1/2)(F_y - 1/2) f` for a
/// coefficient matrix `a` (row-major, rows along x) and marginal vectors.
pub fn spearman_by_integration(a: &[f64], ax: &[f64], ay: &[f64]) -> f64 {
    let dim = ax.len();
    let pts = grid(12.0, 801);
    let step = pts[1] - pts[0];
    let h: Vec<Vec<f64>> = pts
        .iter()
        .map(|&x| (0..dim as u32).map(|k| hermite_direct(k, x)).collect())
        .collect();
    let lower: Vec<Vec<f64>> = pts
        .iter()
        .map(|&x| (0..dim as u32).map(|k| lower_integral(k, x)).collect())
        .collect();
    let fx: Vec<f64> = lower.iter().map(|l| series(ax, |k| l[k as usize]) - 0.5).collect();
    let fy: Vec<f64> = lower.iter().map(|l| series(ay, |k| l[k as usize]) - 0.5).collect();
    let rows: Vec<f64> = (0..pts.len())
        .map(|i| {
            let cols: Vec<f64> = (0..pts.len())
                .map(|j| {
                    let dens: f64 = (0..dim)
                        .map(|k| h[i][k] * (0..dim).map(|l| a[k * dim + l] * h[j][l]).sum::<f64>())
                        .sum();
                    fx[i] * fy[j] * dens
                })
                .collect();
            trapezoid(step, &cols)
        })
        .collect();
    12.0 * trapezoid(step, &rows)
}

/// Direct 2-D integration of `4 int int F f - 1`.
pub fn kendall_by_integration(a: &[f64], dim: usize) -> f64 {
    let pts = grid(12.0, 801);
    let step = pts[1] - pts[0];
    let h: Vec<Vec<f64>> = pts
        .iter()
        .map(|&x| (0..dim as u32).map(|k| hermite_direct(k, x)).collect())
        .collect();
    let lower: Vec<Vec<f64>> = pts
        .iter()
        .map(|&x| (0..dim as u32).map(|k| lower_integral(k, x)).collect())
        .collect();
    let bilinear = |u: &[f64], v: &[f64]| -> f64 {
        (0..dim)
            .map(|k| u[k] * (0..dim).map(|l| a[k * dim + l] * v[l]).sum::<f64>())
            .sum()
    };
    let rows: Vec<f64> = (0..pts.len())
        .map(|i| {
            let cols: Vec<f64> = (0..pts.len())
                .map(|j| bilinear(&lower[i], &lower[j]) * bilinear(&h[i], &h[j]))
                .collect();
            trapezoid(step, &cols)
        })
        .collect();
    4.0 * trapezoid(step, &rows) - 1.0
}

/// Two-pass mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Average ranks (1-based) by counting, O(n^2).
pub fn naive_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let ties = xs.iter().filter(|&&y| y == x).count() as f64;
            below + (ties + 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, _) = mean_std(xs);
    let (my, _) = mean_std(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Standard normal distribution function via the trapezoid rule on the
/// density, accurate to about 1e-12 for |x| < 8.
pub fn normal_cdf(x: f64) -> f64 {
    let lo = -12.0;
    if x <= lo {
        return 0.0;
    }
    integrate(&|t| (-0.5 * t * t).exp() / (2.0 * PI).sqrt(), lo, x, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_direct_low_orders() {
        let c = PI.powf(-0.25);
        assert!((hermite_direct(0, 0.0) - c).abs() < 1e-15);
        assert!((hermite_direct(1, 1.0) - c * 2f64.sqrt() * (-0.5f64).exp()).abs() < 1e-15);
        // H_2 = 4x^2 - 2
        let x: f64 = 0.7;
        let expect = (8.0 * PI.sqrt()).powf(-0.5) * (-0.5f64 * x * x).exp() * (4.0 * x * x - 2.0);
        assert!((hermite_direct(2, x) - expect).abs() < 1e-15);
    }

    #[test]
    fn quadrature_sanity() {
        let v = integrate(&|t: f64| (-t * t).exp(), -10.0, 10.0, 1e-13);
        assert!((v - PI.sqrt()).abs() < 1e-12);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-13);
        let pts = grid(10.0, 401);
        let ys: Vec<f64> = pts.iter().map(|t| (-t * t).exp()).collect();
        assert!((trapezoid(pts[1] - pts[0], &ys) - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(naive_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }
}
