//! Goodness-of-fit and independence statistics used by the samplers.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Critical value of `sqrt(n) D` for the one-sample KS test at 1%.
pub const KS_CRIT_1PCT: f64 = 1.63;

/// One-sample KS statistic of `samples` against `Exponential(rate)`.
pub fn ks_exponential(samples: &[f64], rate: f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter().enumerate().fold(0.0, |d, (i, &t)| {
        let f = -(-rate * t).exp_m1();
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic Kolmogorov tail `P(sqrt(n) D > t)` with the usual small-sample
/// correction `t (1 + 0.12/sqrt n + 0.11/n)`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = d * (sn + 0.12 + 0.11 / sn);
    if t < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Test {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of independence on a contingency table. Empty rows and
/// columns are dropped first.
pub fn chi2_independence(table: &[Vec<u64>]) -> Chi2Test {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncol = rows.first().map(|r| r.len()).unwrap_or(0);
    let cols: Vec<usize> = (0..ncol)
        .filter(|&j| rows.iter().map(|r| r[j]).sum::<u64>() > 0)
        .collect();
    if rows.len() < 2 || cols.len() < 2 {
        return Chi2Test {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let total: f64 = rows.iter().map(|r| r.iter().sum::<u64>() as f64).sum();
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = cols
        .iter()
        .map(|&j| rows.iter().map(|r| r[j] as f64).sum())
        .collect();
    let mut stat = 0.0;
    for (r, rs) in rows.iter().zip(&row_sums) {
        for (&j, cs) in cols.iter().zip(&col_sums) {
            let e = rs * cs / total;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let dof = (rows.len() - 1) * (cols.len() - 1);
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    Chi2Test {
        statistic: stat,
        dof,
        p_value: dist.sf(stat),
    }
}

/// Rank-based quartile (0..4) of every value.
pub fn quartiles(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut q = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        q[i] = (4 * rank / n.max(1)).min(3);
    }
    q
}

/// Quartile of `tau` against category contingency counts.
pub fn quartile_table(tau: &[f64], category: &[usize], n_categories: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n_categories]; 4];
    for (q, &c) in quartiles(tau).into_iter().zip(category) {
        t[q][c] += 1;
    }
    t
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequency {
    pub label: String,
    pub count: u64,
    pub freq: f64,
    pub se: f64,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let s: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let d = ks_exponential(&s, 1.0);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_p_value(d, n) > 0.99);
        assert!(ks_exponential(&s, 3.0) > 0.3);
    }

    #[test]
    fn ks_p_value_at_critical_point() {
        // sqrt(n) D = 1.63 is the 1% point asymptotically
        let n = 1_000_000;
        let p = ks_p_value(1.63 / (n as f64).sqrt(), n);
        assert!((p - 0.0098).abs() < 5e-4, "{p}");
    }

    #[test]
    fn chi2_independent_table() {
        let t = vec![vec![10, 20], vec![20, 40], vec![30, 60]];
        let r = chi2_independence(&t);
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi2_independence(&[vec![50, 0], vec![0, 50]]);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn chi2_drops_empty_columns() {
        let r = chi2_independence(&[vec![5, 0, 5], vec![5, 0, 5]]);
        assert_eq!(r.dof, 1);
        let r = chi2_independence(&[vec![5, 0], vec![5, 0]]);
        assert_eq!((r.dof, r.p_value), (0, 1.0));
    }

    #[test]
    fn quartiles_are_balanced() {
        let v: Vec<f64> = (0..100).rev().map(|i| i as f64).collect();
        let q = quartiles(&v);
        for k in 0..4 {
            assert_eq!(q.iter().filter(|&&x| x == k).count(), 25);
        }
        assert_eq!(q[0], 3);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -4.0 * v + 1.5).collect();
        let (s, c) = linear_fit(&x, &y);
        assert!((s + 4.0).abs() < 1e-12 && (c - 1.5).abs() < 1e-12);
    }
}
