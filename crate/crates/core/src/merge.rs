//! Merging sketches built on disjoint shards of a data set.
//!
//! Without standardization the merged coefficients are the count-weighted
//! average of the shard coefficients, which is exactly what a single sketch
//! over the concatenated data holds.
//!
//! With standardization each shard's coefficients live in that shard's own
//! standardized coordinates. The shard moments are merged exactly, and each
//! shard's density estimate is re-expanded in the merged coordinates:
//!
//! ```text
//! a'_k = int h_k((s_j x + m_j - m) / s) f_j(x) dx,   f_j(x) = sum_p a_jp h_p(x)
//! ```
//!
//! The integral is evaluated with a Gauss-Hermite rule, giving a linear map
//! `T_j` with `a' = T_j a_j` (and `A' = T_j A_j U_j^T` for the joint matrix).
//! Shards are folded left to right.

use crate::basis::{fill_hermite_functions, fill_weightless, BasisTables, GaussHermite};
use crate::bivariate::{BivariateParts, BivariateSketch};
use crate::error::{Error, Result};
use crate::moments::RunningMoments;
use crate::univariate::UnivariateSketch;

/// Matrix `T[k][p] = int h_k(stretch * x + shift) h_p(x) dx`, row-major.
pub fn coordinate_transform(order_n: usize, stretch: f64, shift: f64, rule: &GaussHermite) -> Vec<f64> {
    let dim = order_n + 1;
    let mut out = vec![0.0; dim * dim];
    let mut target = vec![0.0; dim];
    let mut source = vec![0.0; dim];
    // int f(x) h_p(x) dx = sum_q w_q exp(t_q^2) f(t_q) h_p(t_q), and
    // exp(t^2) h_p(t) = exp(t^2 / 2) p_p(t). Exact when stretch = 1, shift = 0.
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        fill_weightless(t, &mut source);
        fill_hermite_functions(stretch * t + shift, &mut target);
        let scale = w * (0.5 * t * t).exp();
        for (k, row) in out.chunks_exact_mut(dim).enumerate() {
            let tk = scale * target[k];
            for (o, &sp) in row.iter_mut().zip(&source) {
                *o += tk * sp;
            }
        }
    }
    out
}

/// `(stretch, shift)` mapping a shard's standardized coordinate into the
/// merged standardized coordinate.
fn affine(shard: &RunningMoments, merged: &RunningMoments) -> (f64, f64) {
    let s = merged.scale();
    (shard.scale() / s, (shard.mean() - merged.mean()) / s)
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    m.chunks_exact(v.len())
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `T A U^T` for square row-major matrices of side `dim`.
fn sandwich(t: &[f64], a: &[f64], u: &[f64], dim: usize) -> Vec<f64> {
    let mut ta = vec![0.0; dim * dim];
    for k in 0..dim {
        for p in 0..dim {
            let tkp = t[k * dim + p];
            if tkp == 0.0 {
                continue;
            }
            for (dst, &apq) in ta[k * dim..(k + 1) * dim].iter_mut().zip(&a[p * dim..(p + 1) * dim]) {
                *dst += tkp * apq;
            }
        }
    }
    let mut out = vec![0.0; dim * dim];
    for k in 0..dim {
        for l in 0..dim {
            out[k * dim + l] = ta[k * dim..(k + 1) * dim]
                .iter()
                .zip(&u[l * dim..(l + 1) * dim])
                .map(|(x, y)| x * y)
                .sum();
        }
    }
    out
}

fn check_shards(configs: impl IntoIterator<Item = (usize, bool, Option<f64>, u64)>) -> Result<()> {
    let mut first: Option<(usize, bool)> = None;
    for (order_n, standardize, lambda, count) in configs {
        if lambda.is_some() {
            return Err(Error::Incompatible(
                "exponentially weighted sketches cannot be merged".into(),
            ));
        }
        match first {
            None => first = Some((order_n, standardize)),
            Some((n, _)) if n != order_n => {
                return Err(Error::Incompatible(format!("orders differ ({n} vs {order_n})")));
            }
            Some((_, st)) if st != standardize => {
                return Err(Error::Incompatible("standardize flags differ".into()));
            }
            _ => {}
        }
        let need = if standardize { 2 } else { 1 };
        if count < need {
            return Err(Error::InsufficientObservations { have: count, need });
        }
    }
    first.map(|_| ()).ok_or(Error::EmptyInput)
}

pub fn merge_univariate(sketches: &[UnivariateSketch]) -> Result<UnivariateSketch> {
    check_shards(
        sketches
            .iter()
            .map(|s| (s.order_n(), s.standardize(), s.lambda(), s.obs_count())),
    )?;
    if let [only] = sketches {
        return Ok(only.clone());
    }
    let first = &sketches[0];
    let dim = first.order_n() + 1;
    let moments: Vec<RunningMoments> = sketches.iter().map(|s| *s.moments()).collect();
    let merged_moments = RunningMoments::merge(&moments)?;
    let total: u64 = sketches.iter().map(|s| s.obs_count()).sum();
    let n = total as f64;

    let mut coeffs = vec![0.0; dim];
    if first.standardize() {
        let tables = BasisTables::for_order(first.order_n())?;
        for s in sketches {
            let (stretch, shift) = affine(s.moments(), &merged_moments);
            let t = coordinate_transform(first.order_n(), stretch, shift, tables.quadrature());
            let weight = s.obs_count() as f64 / n;
            for (c, v) in coeffs.iter_mut().zip(mat_vec(&t, s.coeffs())) {
                *c += weight * v;
            }
        }
    } else {
        for s in sketches {
            let weight = s.obs_count() as f64 / n;
            for (c, &a) in coeffs.iter_mut().zip(s.coeffs()) {
                *c += weight * a;
            }
        }
    }
    UnivariateSketch::from_parts(
        first.order_n(),
        first.standardize(),
        None,
        coeffs,
        merged_moments,
        total,
    )
}

pub fn merge_bivariate(sketches: &[BivariateSketch]) -> Result<BivariateSketch> {
    check_shards(
        sketches
            .iter()
            .map(|s| (s.order_n(), s.standardize(), s.lambda(), s.obs_count())),
    )?;
    if let [only] = sketches {
        return Ok(only.clone());
    }
    let first = &sketches[0];
    let order_n = first.order_n();
    let dim = order_n + 1;
    let mx: Vec<RunningMoments> = sketches.iter().map(|s| *s.moments_x()).collect();
    let my: Vec<RunningMoments> = sketches.iter().map(|s| *s.moments_y()).collect();
    let merged_x = RunningMoments::merge(&mx)?;
    let merged_y = RunningMoments::merge(&my)?;
    let total: u64 = sketches.iter().map(|s| s.obs_count()).sum();
    let n = total as f64;

    let mut matrix = vec![0.0; dim * dim];
    let mut marginal_x = vec![0.0; dim];
    let mut marginal_y = vec![0.0; dim];
    let accumulate = |dst: &mut [f64], src: &[f64], weight: f64| {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d += weight * s;
        }
    };
    if first.standardize() {
        let tables = BasisTables::for_order(order_n)?;
        let rule = tables.quadrature();
        for s in sketches {
            let (sx, cx) = affine(s.moments_x(), &merged_x);
            let (sy, cy) = affine(s.moments_y(), &merged_y);
            let tx = coordinate_transform(order_n, sx, cx, rule);
            let ty = coordinate_transform(order_n, sy, cy, rule);
            let weight = s.obs_count() as f64 / n;
            accumulate(&mut matrix, &sandwich(&tx, s.coeff_matrix(), &ty, dim), weight);
            accumulate(&mut marginal_x, &mat_vec(&tx, s.marginal_x()), weight);
            accumulate(&mut marginal_y, &mat_vec(&ty, s.marginal_y()), weight);
        }
    } else {
        for s in sketches {
            let weight = s.obs_count() as f64 / n;
            accumulate(&mut matrix, s.coeff_matrix(), weight);
            accumulate(&mut marginal_x, s.marginal_x(), weight);
            accumulate(&mut marginal_y, s.marginal_y(), weight);
        }
    }
    BivariateSketch::from_parts(BivariateParts {
        order_n,
        standardize: first.standardize(),
        lambda: None,
        coeff_matrix: matrix,
        marginal_x,
        marginal_y,
        moments_x: merged_x,
        moments_y: merged_y,
        obs_count: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transform_is_orthonormality() {
        let rule = GaussHermite::new(64).unwrap();
        let t = coordinate_transform(20, 1.0, 0.0, &rule);
        for k in 0..21 {
            for p in 0..21 {
                let expect = if k == p { 1.0 } else { 0.0 };
                assert!((t[k * 21 + p] - expect).abs() < 1e-12, "({k}, {p})");
            }
        }
    }

    #[test]
    fn rejects_incompatible_inputs() {
        let a = {
            let mut s = UnivariateSketch::new(10, false, None).unwrap();
            s.update_batch(&[1.0, 2.0]).unwrap();
            s
        };
        let mut b = UnivariateSketch::new(12, false, None).unwrap();
        b.update_batch(&[1.0, 2.0]).unwrap();
        assert!(matches!(merge_univariate(&[a.clone(), b]), Err(Error::Incompatible(_))));

        let mut c = UnivariateSketch::new(10, true, None).unwrap();
        c.update_batch(&[1.0, 2.0]).unwrap();
        assert!(matches!(merge_univariate(&[a.clone(), c]), Err(Error::Incompatible(_))));

        let mut e = UnivariateSketch::new(10, false, Some(0.1)).unwrap();
        e.update_sequential(1.0).unwrap();
        assert!(matches!(merge_univariate(&[a.clone(), e]), Err(Error::Incompatible(_))));

        assert_eq!(merge_univariate(&[]), Err(Error::EmptyInput));
        let empty = UnivariateSketch::new(10, false, None).unwrap();
        assert!(merge_univariate(&[a, empty]).is_err());
    }

    #[test]
    fn singleton_is_identity() {
        let mut s = BivariateSketch::new(6, true, None).unwrap();
        s.update_batch(&[[0.0, 1.0], [2.0, -1.0], [0.5, 0.25]]).unwrap();
        assert_eq!(merge_bivariate(&[s.clone()]).unwrap(), s);
    }
}
