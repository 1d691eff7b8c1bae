use std::fmt::Write;

use hermite_sketch::{BivariateSketch, UnivariateSketch};
use rayon::prelude::*;

use crate::correlation::{normal_kendall, sample_bivariate_normal, sample_spearman};
use crate::distributions::TestDistribution;
use crate::iae::{iae_measures, DEFAULT_QMC_POINTS};
use crate::{mean_and_std, replication_seed, EvalError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileStudyRow {
    pub distribution: &'static str,
    pub n: usize,
    pub replications: usize,
    pub miae: f64,
    pub iae_std: f64,
    pub pmiae: f64,
    pub piae_std: f64,
}

fn check_replications(m: usize) -> Result<()> {
    if m < 2 {
        return Err(EvalError::InvalidParameter(format!(
            "need at least 2 replications, got {m}"
        )));
    }
    Ok(())
}

/// For each distribution, `m` times: draw `n` points, batch-update a
/// standardized sketch of order `order_n`, and measure IAE and pIAE.
pub fn quantile_iae_study(
    dists: &[TestDistribution],
    n: usize,
    m: usize,
    order_n: usize,
    seed: u64,
) -> Result<Vec<QuantileStudyRow>> {
    check_replications(m)?;
    dists
        .iter()
        .enumerate()
        .map(|(cell, &dist)| {
            let runs: Vec<(f64, f64)> = (0..m)
                .into_par_iter()
                .map(|rep| {
                    let xs = dist.sample(n, replication_seed(seed, cell as u64, rep as u64));
                    let mut sketch = UnivariateSketch::new(order_n, true, None)?;
                    sketch.update_batch(&xs)?;
                    let e = iae_measures(&sketch, dist, DEFAULT_QMC_POINTS)?;
                    Ok((e.iae, e.piae))
                })
                .collect::<Result<_>>()?;
            let (miae, iae_std) = mean_and_std(&runs.iter().map(|r| r.0).collect::<Vec<_>>());
            let (pmiae, piae_std) = mean_and_std(&runs.iter().map(|r| r.1).collect::<Vec<_>>());
            Ok(QuantileStudyRow {
                distribution: dist.name(),
                n,
                replications: m,
                miae,
                iae_std,
                pmiae,
                piae_std,
            })
        })
        .collect()
}

/// Per-correlation results of [`correlation_mae_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct RhoRow {
    pub rho: f64,
    pub spearman_mae: f64,
    pub kendall_mae: f64,
}

/// MAE averaged over the correlation values, with the spread across them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSummary {
    pub spearman_mae_avg: f64,
    pub spearman_mae_std: f64,
    pub kendall_mae_avg: f64,
    pub kendall_mae_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStudy {
    pub n: usize,
    pub replications: usize,
    pub order_n: usize,
    pub rows: Vec<RhoRow>,
    pub summary: CorrelationSummary,
}

/// For each `rho`, `m` times: draw `n` bivariate normal pairs, batch-update
/// a standardized sketch, and compare its Spearman estimate with the sample
/// Spearman coefficient and its Kendall estimate with `2 asin(rho) / pi`.
pub fn correlation_mae_study(n: usize, rhos: &[f64], m: usize, order_n: usize, seed: u64) -> Result<CorrelationStudy> {
    check_replications(m)?;
    if rhos.is_empty() {
        return Err(EvalError::InvalidParameter("no correlation values given".into()));
    }
    let rows = rhos
        .iter()
        .enumerate()
        .map(|(cell, &rho)| {
            let errors: Vec<(f64, f64)> = (0..m)
                .into_par_iter()
                .map(|rep| {
                    let pairs = sample_bivariate_normal(n, rho, replication_seed(seed, cell as u64, rep as u64))?;
                    let mut sketch = BivariateSketch::new(order_n, true, None)?;
                    sketch.update_batch(&pairs)?;
                    let spearman = (sketch.spearman()? - sample_spearman(&pairs)).abs();
                    let kendall = (sketch.kendall()? - normal_kendall(rho)).abs();
                    Ok((spearman, kendall))
                })
                .collect::<Result<_>>()?;
            let k = errors.len() as f64;
            Ok(RhoRow {
                rho,
                spearman_mae: errors.iter().map(|e| e.0).sum::<f64>() / k,
                kendall_mae: errors.iter().map(|e| e.1).sum::<f64>() / k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (spearman_mae_avg, spearman_mae_std) = mean_and_std(&rows.iter().map(|r| r.spearman_mae).collect::<Vec<_>>());
    let (kendall_mae_avg, kendall_mae_std) = mean_and_std(&rows.iter().map(|r| r.kendall_mae).collect::<Vec<_>>());
    Ok(CorrelationStudy {
        n,
        replications: m,
        order_n,
        rows,
        summary: CorrelationSummary {
            spearman_mae_avg,
            spearman_mae_std,
            kendall_mae_avg,
            kendall_mae_std,
        },
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a header row and one row per distribution.
pub fn quantile_rows_csv(rows: &[QuantileStudyRow]) -> String {
    let mut out = String::from("distribution,n,m,miae,iae_std,pmiae,piae_std\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.distribution,
            r.n,
            r.replications,
            num(r.miae),
            num(r.iae_std),
            num(r.pmiae),
            num(r.piae_std)
        );
    }
    out
}

/// CSV with one row per correlation value followed by an `all` summary row
/// whose error columns hold the average and the spread across rows.
pub fn correlation_csv(study: &CorrelationStudy) -> String {
    let mut out = String::from("rho,n,m,spearman_mae,spearman_mae_std,kendall_mae,kendall_mae_std\n");
    for r in &study.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},,{},",
            r.rho,
            study.n,
            study.replications,
            num(r.spearman_mae),
            num(r.kendall_mae)
        );
    }
    let s = &study.summary;
    let _ = writeln!(
        out,
        "all,{},{},{},{},{},{}",
        study.n,
        study.replications,
        num(s.spearman_mae_avg),
        num(s.spearman_mae_std),
        num(s.kendall_mae_avg),
        num(s.kendall_mae_std)
    );
    out
}
