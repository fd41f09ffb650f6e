//! Nearest-rank percentiles, z-scores, Pearson correlation, group means and
//! boxplot summaries.
//!
//! Every order statistic uses the nearest-rank rule: the p-th percentile of n
//! values is the ceil(p/100 * n)-th smallest, and p = 0 gives the minimum. The
//! median is the 50th percentile, i.e. the lower median for even n.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("percentile {0} outside [0, 100]")]
    PercentileRange(String),
    #[error("input contains NaN")]
    NotANumber,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("degenerate population: {0}")]
    DegeneratePopulation(&'static str),
    #[error("need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

fn sorted<T: Scalar>(values: &[T]) -> Result<Vec<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// 1-based nearest rank for percentile `p` of `n` values.
fn nearest_rank<T: Scalar>(p: T, n: usize) -> usize {
    let r = (p * T::lit(n as f64) / T::lit(100.0)).ceil();
    r.to_usize().unwrap_or(0).clamp(1, n)
}

fn check_p<T: Scalar>(p: T) -> Result<(), StatsError> {
    if p.is_nan() || p < T::zero() || p > T::lit(100.0) {
        return Err(StatsError::PercentileRange(format!("{p:?}")));
    }
    Ok(())
}

fn pick<T: Scalar>(sorted: &[T], p: T) -> T {
    sorted[nearest_rank(p, sorted.len()) - 1]
}

pub fn percentile<T: Scalar>(values: &[T], p: T) -> Result<T, StatsError> {
    check_p(p)?;
    Ok(pick(&sorted(values)?, p))
}

pub fn median<T: Scalar>(values: &[T]) -> Result<T, StatsError> {
    percentile(values, T::lit(50.0))
}

pub fn mean<T: Scalar>(values: &[T]) -> Result<T, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    Ok(values.iter().copied().sum::<T>() / T::lit(values.len() as f64))
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd<T: Scalar>(values: &[T]) -> Result<T, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::DegeneratePopulation("fewer than two values"));
    }
    let m = mean(values)?;
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Ok((ss / T::lit((values.len() - 1) as f64)).sqrt())
}

/// `(value - mean) / sample sd` of the population.
pub fn zscore<T: Scalar>(value: T, population: &[T]) -> Result<T, StatsError> {
    let sd = sample_sd(population)?;
    if !(sd > T::zero()) {
        return Err(StatsError::DegeneratePopulation("zero variance"));
    }
    Ok((value - mean(population)?) / sd)
}

/// Sample Pearson correlation, clamped to [-1, 1] against rounding.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::DegenerateInput("length mismatch"));
    }
    if xs.len() < 2 {
        return Err(StatsError::DegenerateInput("fewer than two pairs"));
    }
    let (mx, my) = (mean(xs)?, mean(ys)?);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > T::zero()) || !(syy > T::zero()) {
        return Err(StatsError::DegenerateInput("zero variance"));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary<T> {
    /// Smallest value inside the lower fence.
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    /// Largest value inside the upper fence.
    pub max: T,
    /// Values beyond q1 - 1.5 IQR or q3 + 1.5 IQR, ascending.
    pub outliers: Vec<T>,
}

pub fn boxplot_summary<T: Scalar>(values: &[T]) -> Result<BoxplotSummary<T>, StatsError> {
    let v = sorted(values)?;
    let (q1, median, q3) = (pick(&v, T::lit(25.0)), pick(&v, T::lit(50.0)), pick(&v, T::lit(75.0)));
    let k = T::lit(1.5) * (q3 - q1);
    let (lo, hi) = (q1 - k, q3 + k);
    let inside: Vec<T> = v.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    Ok(BoxplotSummary {
        min: inside[0],
        q1,
        median,
        q3,
        max: inside[inside.len() - 1],
        outliers: v.into_iter().filter(|&x| x < lo || x > hi).collect(),
    })
}

/// One ligand for [`compare_groups`]; `metrics` align with the metric names.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLigand<T> {
    pub label: String,
    pub energy: T,
    pub metrics: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison<T> {
    pub metric: String,
    pub mean_a: T,
    pub count_a: usize,
    pub mean_b: T,
    pub count_b: usize,
}

pub const GROUP_METRICS: [&str; 4] = ["aromatic_rings", "carboxylic_acids", "hbd", "hba"];

/// Sorts by energy (ties by label) and compares the mean of each metric over
/// the first `k` rows (group A, strongest binders) with the last `k` (group B).
pub fn compare_groups<T: Scalar>(
    ranked: &[RankedLigand<T>],
    metric_names: &[&str],
    k: usize,
) -> Result<Vec<GroupComparison<T>>, StatsError> {
    if k == 0 || ranked.len() < 2 * k {
        return Err(StatsError::InsufficientData {
            needed: 2 * k.max(1),
            got: ranked.len(),
        });
    }
    if ranked.iter().any(|r| r.energy.is_nan() || r.metrics.len() != metric_names.len()) {
        return Err(StatsError::DegenerateInput("NaN energy or metric count mismatch"));
    }
    let mut order: Vec<&RankedLigand<T>> = ranked.iter().collect();
    order.sort_by(|a, b| {
        a.energy
            .partial_cmp(&b.energy)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.label.cmp(&b.label))
    });
    let (a, b) = (&order[..k], &order[order.len() - k..]);
    let group_mean = |g: &[&RankedLigand<T>], j: usize| g.iter().map(|r| r.metrics[j]).sum::<T>() / T::lit(k as f64);
    Ok(metric_names
        .iter()
        .enumerate()
        .map(|(j, name)| GroupComparison {
            metric: name.to_string(),
            mean_a: group_mean(a, j),
            count_a: k,
            mean_b: group_mean(b, j),
            count_b: k,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 99.0).unwrap(), 99.0);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 100.0).unwrap(), 100.0);
        assert_eq!(percentile(&[0.1, 0.12, 0.16, 0.2], 50.0).unwrap(), 0.12);
        assert_eq!(percentile(&[7.5f32], 33.0).unwrap(), 7.5);
        assert_eq!(percentile::<f64>(&[], 50.0), Err(StatsError::EmptyInput));
        assert!(percentile(&[1.0], 101.0).is_err());
    }

    #[test]
    fn zscore_examples() {
        let pop = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        assert!((zscore(7.0, &pop).unwrap() - 2.529822).abs() < 1e-6);
        assert_eq!(zscore(3.0, &pop).unwrap(), 0.0);
        let sd = sample_sd(&pop).unwrap();
        assert!((zscore(3.0 + sd, &pop).unwrap() - 1.0).abs() < 1e-12);
        assert!(zscore(1.0, &[2.0, 2.0]).is_err());
        assert!(zscore(1.0, &[2.0]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0f64, 2.0, 3.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        assert_eq!(pearson(&x, &[-1.0, -2.0, -3.0]).unwrap(), -1.0);
        assert!((pearson(&x, &[2.0, 2.0, 4.0]).unwrap() - 0.866025).abs() < 1e-4);
        assert!(pearson(&x, &[1.0, 1.0, 1.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn boxplot_examples() {
        let b = boxplot_summary(&[5.0]).unwrap();
        assert_eq!((b.min, b.q1, b.median, b.q3, b.max), (5.0, 5.0, 5.0, 5.0, 5.0));
        assert!(b.outliers.is_empty());
        let b = boxplot_summary(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.max, 4.0);
    }

    #[test]
    fn group_examples() {
        let rows: Vec<RankedLigand<f64>> = [(-12.0, 3.0), (-6.0, 1.0), (-11.0, 3.0), (-5.0, 1.0)]
            .iter()
            .enumerate()
            .map(|(i, &(e, ar))| RankedLigand {
                label: format!("l{i}"),
                energy: e,
                metrics: vec![ar],
            })
            .collect();
        let g = compare_groups(&rows, &["aromatic_rings"], 2).unwrap();
        assert_eq!((g[0].mean_a, g[0].mean_b), (3.0, 1.0));
        assert!(compare_groups(&rows, &["aromatic_rings"], 3).is_err());
    }
}
