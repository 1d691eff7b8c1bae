//! Normalized Hermite functions, their one-sided integrals, and the
//! precomputed cross-integral tables used by the rank-correlation estimators.
//!
//! The normalized Hermite functions are
//!
//! ```text
//! h_k(x) = (2^k k! sqrt(pi))^(-1/2) exp(-x^2 / 2) H_k(x)
//! ```
//!
//! and are evaluated by recurring on `h_k` itself. Recurring on the raw
//! polynomials `H_k` overflows long before the orders supported here.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{check_finite, Error, Result};

/// Largest series order accepted anywhere in the crate.
pub const MAX_ORDER: usize = 100;

/// Smallest Gauss-Hermite order used for the cross-integral tables and for
/// coefficient transformations during merges.
pub const MIN_QUADRATURE_ORDER: usize = 64;

/// `pi^(-1/4)`, the value of `h_0(0)`.
pub(crate) fn pi_quarter_inv() -> f64 {
    PI.powf(-0.25)
}

pub(crate) fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        Err(Error::OrderTooLarge(n))
    } else {
        Ok(())
    }
}

/// Default quadrature order for a series of order `n`.
pub fn default_quadrature_order(n: usize) -> usize {
    (2 * n + 8).max(MIN_QUADRATURE_ORDER)
}

/// Fills `out` with `h_0(x), ..., h_{out.len()-1}(x)`.
///
/// No validation; callers check finiteness and order.
pub(crate) fn fill_hermite_functions(x: f64, out: &mut [f64]) {
    fill_recurrence(x, pi_quarter_inv() * (-0.5 * x * x).exp(), out);
}

/// Fills `out` with `exp(x^2 / 2) h_k(x)`: the Hermite functions with the
/// Gaussian factor removed. Used when a Gauss-Hermite rule already supplies
/// the weight.
pub(crate) fn fill_weightless(x: f64, out: &mut [f64]) {
    fill_recurrence(x, pi_quarter_inv(), out);
}

fn fill_recurrence(x: f64, first: f64, out: &mut [f64]) {
    let Some(h0) = out.first_mut() else {
        return;
    };
    *h0 = first;
    if out.len() > 1 {
        out[1] = SQRT_2 * x * first;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = x * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Lower integrals `int_{-inf}^{x} h_k(t) dt` for `k < out.len()`.
///
/// `h` must hold at least `out.len() - 1` Hermite function values at `x`.
pub(crate) fn fill_lower_integrals(x: f64, h: &[f64], out: &mut [f64]) {
    let root = PI.powf(0.25);
    let Some(first) = out.first_mut() else {
        return;
    };
    *first = root / SQRT_2 * libm::erfc(-x / SQRT_2);
    if out.len() > 1 {
        out[1] = -SQRT_2 / root * (-0.5 * x * x).exp();
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = -(2.0 / (kf + 1.0)).sqrt() * h[k] + (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Upper integrals `int_{x}^{inf} h_k(t) dt` for `k < out.len()`.
pub(crate) fn fill_upper_integrals(x: f64, h: &[f64], out: &mut [f64]) {
    let root = PI.powf(0.25);
    let Some(first) = out.first_mut() else {
        return;
    };
    *first = root / SQRT_2 * libm::erfc(x / SQRT_2);
    if out.len() > 1 {
        out[1] = SQRT_2 / root * (-0.5 * x * x).exp();
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * h[k] + (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Returns `h_0(x), ..., h_n(x)`.
pub fn hermite_function_values(x: f64, n: usize) -> Result<Vec<f64>> {
    check_finite(x)?;
    check_order(n)?;
    let mut out = vec![0.0; n + 1];
    fill_hermite_functions(x, &mut out);
    Ok(out)
}

/// Returns `int_{-inf}^{x} h_k(t) dt` for `k = 0..=n`.
pub fn lower_integral_values(x: f64, n: usize) -> Result<Vec<f64>> {
    check_finite(x)?;
    check_order(n)?;
    let mut h = vec![0.0; n + 1];
    fill_hermite_functions(x, &mut h);
    let mut out = vec![0.0; n + 1];
    fill_lower_integrals(x, &h, &mut out);
    Ok(out)
}

/// Returns `int_{x}^{inf} h_k(t) dt` for `k = 0..=n`.
pub fn upper_integral_values(x: f64, n: usize) -> Result<Vec<f64>> {
    check_finite(x)?;
    check_order(n)?;
    let mut h = vec![0.0; n + 1];
    fill_hermite_functions(x, &mut h);
    let mut out = vec![0.0; n + 1];
    fill_upper_integrals(x, &h, &mut out);
    Ok(out)
}

/// Gauss-Hermite rule for the weight `exp(-x^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Computes an `order`-point rule. Each non-negative node is isolated by
    /// Sturm-sequence bisection on the symmetric Jacobi matrix of the Hermite
    /// recurrence, then polished by Newton steps on the normalized
    /// polynomial; negative nodes are mirrored.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("quadrature order must be positive".into()));
        }
        let n = order;
        let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in n / 2..n {
            // The i-th smallest eigenvalue lies where the count crosses i.
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if eigenvalues_below(mid, n) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            if n % 2 == 1 && i == n / 2 {
                z = 0.0;
            } else {
                for _ in 0..3 {
                    let (p, dp) = normalized_poly_and_derivative(z, n);
                    let next = z - p / dp;
                    if !next.is_finite() || (next - z).abs() > (hi - lo).max(1e-12) {
                        break;
                    }
                    z = next;
                }
            }
            let (_, dp) = normalized_poly_and_derivative(z, n);
            let w = 2.0 / (dp * dp);
            if !z.is_finite() || !w.is_finite() {
                return Err(Error::QuadratureConvergence(order));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::QuadratureConvergence(order));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Approximates `int f(x) exp(-x^2) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gaussian parts `exp(u^2 / 2) G_l(u)` of the lower integrals, from the
/// weightless Hermite values at `u`.
fn fill_gaussian_parts(poly: &[f64], out: &mut [f64]) {
    let Some(first) = out.first_mut() else {
        return;
    };
    *first = 0.0;
    if out.len() > 1 {
        out[1] = -SQRT_2 / PI.powf(0.25);
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = -(2.0 / (kf + 1.0)).sqrt() * poly[k] + (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Number of eigenvalues below `x` of the order-`n` Jacobi matrix for the
/// weight `exp(-x^2)` (zero diagonal, off-diagonal `sqrt(k / 2)`).
fn eigenvalues_below(x: f64, n: usize) -> usize {
    let mut count = 0;
    let mut q = -x;
    for k in 1..=n {
        if k > 1 {
            q = -x - (k - 1) as f64 / 2.0 / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * (1.0 + x.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Normalized polynomial `p_n(z) = pi^(-1/4) (2^n n!)^(-1/2) H_n(z)` and its
/// derivative.
fn normalized_poly_and_derivative(z: f64, n: usize) -> (f64, f64) {
    let mut p1 = pi_quarter_inv();
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Cross-integral tables for a fixed series order.
///
/// `w[k][l] = int h_k(u) int_{-inf}^{u} h_l(v) dv du` and
/// `z[k] = int h_k(u) du`, both over the whole real line.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTables {
    order_n: usize,
    w_matrix: Vec<f64>,
    z_vector: Vec<f64>,
    quadrature: GaussHermite,
}

impl BasisTables {
    /// Builds the tables with an explicit quadrature order.
    pub fn build(n: usize, quadrature_order: usize) -> Result<Self> {
        check_order(n)?;
        if quadrature_order < n + 1 {
            return Err(Error::InvalidParameter(format!(
                "quadrature order {quadrature_order} is below n + 1 = {}",
                n + 1
            )));
        }
        let quadrature = GaussHermite::new(quadrature_order)?;
        let dim = n + 1;
        let nodes = quadrature.nodes();
        let weights = quadrature.weights();
        let mut poly = vec![0.0; dim];

        // z_k: with u = sqrt(2) t, h_k(u) du = sqrt(2) exp(-t^2) p_k(sqrt(2) t) dt,
        // a polynomial against the rule's weight.
        let mut z_vector = vec![0.0; dim];
        for (&t, &wq) in nodes.iter().zip(weights) {
            fill_weightless(SQRT_2 * t, &mut poly);
            for (z, &p) in z_vector.iter_mut().zip(&poly) {
                *z += SQRT_2 * wq * p;
            }
        }

        // Split each lower integral as L_l = c_l L_0 + G_l where G_l is a
        // Gaussian times a polynomial. Products h_k G_l are then exp(-u^2)
        // times a polynomial of degree below 2N, which the rule integrates
        // exactly on unscaled nodes.
        let mut c = vec![0.0; dim];
        c[0] = 1.0;
        for k in 1..n {
            c[k + 1] = (k as f64 / (k as f64 + 1.0)).sqrt() * c[k - 1];
        }
        let mut gauss_part = vec![0.0; dim];
        // cross[k][l] = int h_k G_l
        let mut cross = vec![0.0; dim * dim];
        for (&t, &wq) in nodes.iter().zip(weights) {
            fill_weightless(t, &mut poly);
            fill_gaussian_parts(&poly, &mut gauss_part);
            for k in 0..dim {
                let pk = wq * poly[k];
                for (dst, &g) in cross[k * dim..(k + 1) * dim].iter_mut().zip(&gauss_part) {
                    *dst += pk * g;
                }
            }
        }
        // W_k0: for even k, L_0 - z_0 / 2 is odd and h_k even. For odd k,
        // integrating by parts gives -int G_k h_0 since z_k = 0.
        let first_column: Vec<f64> = (0..dim)
            .map(|k| {
                if k % 2 == 0 {
                    0.5 * z_vector[0] * z_vector[k]
                } else {
                    -cross[k]
                }
            })
            .collect();
        let mut w_matrix = vec![0.0; dim * dim];
        for k in 0..dim {
            for l in 0..dim {
                w_matrix[k * dim + l] = c[l] * first_column[k] + cross[k * dim + l];
            }
        }
        Ok(Self {
            order_n: n,
            w_matrix,
            z_vector,
            quadrature,
        })
    }

    /// Shared tables for order `n` at the default quadrature order. Each
    /// order is built once per process.
    pub fn for_order(n: usize) -> Result<Arc<Self>> {
        check_order(n)?;
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BasisTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = guard.get(&n) {
            return Ok(Arc::clone(t));
        }
        let tables = Arc::new(Self::build(n, default_quadrature_order(n))?);
        guard.insert(n, Arc::clone(&tables));
        Ok(tables)
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn dim(&self) -> usize {
        self.order_n + 1
    }

    /// Row-major `(N+1) x (N+1)` matrix.
    pub fn w_matrix(&self) -> &[f64] {
        &self.w_matrix
    }

    pub fn w(&self, k: usize, l: usize) -> f64 {
        self.w_matrix[k * self.dim() + l]
    }

    pub fn z_vector(&self) -> &[f64] {
        &self.z_vector
    }

    pub fn quadrature(&self) -> &GaussHermite {
        &self.quadrature
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature.order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_origin() {
        let h = hermite_function_values(0.0, 1).unwrap();
        assert!((h[0] - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(h[1], 0.0);

        let lower = lower_integral_values(0.0, 1).unwrap();
        let upper = upper_integral_values(0.0, 1).unwrap();
        let half = PI.powf(0.25) / SQRT_2;
        assert!((lower[0] - half).abs() < 1e-15);
        assert!((upper[0] - half).abs() < 1e-15);
        assert!((lower[1] + SQRT_2 / PI.powf(0.25)).abs() < 1e-15);
        assert!((upper[1] - SQRT_2 / PI.powf(0.25)).abs() < 1e-15);
        assert!((lower[0] - 0.941_396_3).abs() < 1e-6);
        assert!((lower[1] + 1.062_252_0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(hermite_function_values(f64::NAN, 3), Err(Error::NonFinite(_))));
        assert!(matches!(
            lower_integral_values(f64::INFINITY, 3),
            Err(Error::NonFinite(_))
        ));
        assert_eq!(
            hermite_function_values(0.0, MAX_ORDER + 1),
            Err(Error::OrderTooLarge(101))
        );
        assert!(BasisTables::build(10, 5).is_err());
        assert!(GaussHermite::new(0).is_err());
    }

    #[test]
    fn values_stay_finite_and_bounded_far_out() {
        for &x in &[-50.0, -20.0, -7.5, 0.0, 3.3, 14.0, 50.0] {
            let h = hermite_function_values(x, MAX_ORDER).unwrap();
            assert!(h.iter().all(|v| v.is_finite() && v.abs() <= 0.82), "x = {x}");
            let l = lower_integral_values(x, MAX_ORDER).unwrap();
            let u = upper_integral_values(x, MAX_ORDER).unwrap();
            assert!(l.iter().chain(&u).all(|v| v.is_finite()));
        }
    }

    #[test]
    fn gauss_hermite_low_order_rules() {
        let gh = GaussHermite::new(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((gh.nodes()[0] + r).abs() < 1e-14 && (gh.nodes()[1] - r).abs() < 1e-14);
        assert!((gh.weights()[0] - PI.sqrt() / 2.0).abs() < 1e-14);

        let gh = GaussHermite::new(3).unwrap();
        assert_eq!(gh.nodes()[1], 0.0);
        assert!((gh.weights()[1] - 2.0 * PI.sqrt() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_hermite_weights_and_moments() {
        for order in [1, 5, 20, 64, 100, 208] {
            let gh = GaussHermite::new(order).unwrap();
            let total: f64 = gh.weights().iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-10, "order {order}: {total}");
            assert!(gh.nodes().windows(2).all(|w| w[0] < w[1]));
            if order >= 3 {
                let second = gh.integrate(|x| x * x);
                assert!((second - PI.sqrt() / 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn table_invariants() {
        let t = BasisTables::build(30, default_quadrature_order(30)).unwrap();
        assert!((t.w(0, 0) - PI.sqrt()).abs() < 1e-8);
        assert!((t.z_vector()[0] - SQRT_2 * PI.powf(0.25)).abs() < 1e-10);
        for (k, z) in t.z_vector().iter().enumerate() {
            if k % 2 == 1 {
                assert!(z.abs() < 1e-10, "z[{k}] = {z}");
            }
        }
        assert!(t.w_matrix().iter().all(|v| v.is_finite()));
        // Integration by parts: W + W^T = z z^T.
        for k in 0..=30 {
            for l in 0..=30 {
                let lhs = t.w(k, l) + t.w(l, k);
                let rhs = t.z_vector()[k] * t.z_vector()[l];
                assert!((lhs - rhs).abs() < 1e-12, "({k}, {l}): {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn tables_are_deterministic_and_cached() {
        let a = BasisTables::build(12, 64).unwrap();
        let b = BasisTables::build(12, 64).unwrap();
        assert!(a
            .w_matrix()
            .iter()
            .zip(b.w_matrix())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = BasisTables::for_order(12).unwrap();
        let d = BasisTables::for_order(12).unwrap();
        assert!(Arc::ptr_eq(&c, &d));
    }
}
