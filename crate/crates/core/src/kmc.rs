//! Kinetic Monte Carlo exit events: `tau ~ Exp(K)` and an independent
//! channel drawn with probability `k_z / K`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, Substream};
use crate::stats::{self, Chi2Test};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmcModel {
    labels: Vec<String>,
    rates: Vec<f64>,
    total: f64,
}

impl KmcModel {
    pub fn new(channels: Vec<(String, f64)>) -> Result<Self> {
        if channels.iter().any(|(_, k)| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidParameter(
                "rates must be finite and >= 0".into(),
            ));
        }
        let total: f64 = channels.iter().map(|(_, k)| k).sum();
        if !(total > 0.0) {
            return Err(Error::NoExitChannel);
        }
        let (labels, rates) = channels.into_iter().unzip();
        Ok(KmcModel {
            labels,
            rates,
            total,
        })
    }

    pub fn total_rate(&self) -> f64 {
        self.total
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Same channels with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        KmcModel::new(
            self.labels
                .iter()
                .cloned()
                .zip(self.rates.iter().map(|k| k * factor))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitEvent {
    pub tau: f64,
    pub label: usize,
}

/// Draws one event from two independent generators.
pub fn sample_exit_with<R: Rng, S: Rng>(
    model: &KmcModel,
    time_rng: &mut R,
    label_rng: &mut S,
) -> ExitEvent {
    // U in (0, 1]
    let u = 1.0 - time_rng.random::<f64>();
    let tau = -u.ln() / model.total;
    let target = label_rng.random::<f64>() * model.total;
    let mut acc = 0.0;
    let mut label = model
        .rates
        .iter()
        .rposition(|&k| k > 0.0)
        .expect("total > 0");
    for (i, k) in model.rates.iter().enumerate() {
        acc += k;
        if target < acc {
            label = i;
            break;
        }
    }
    ExitEvent { tau, label }
}

/// Event `index` of the batch keyed by `seed`.
pub fn sample_exit(model: &KmcModel, seed: u64, index: u64) -> ExitEvent {
    let mut t = rng::stream(seed, index, Substream::ExitTime);
    let mut l = rng::stream(seed, index, Substream::ExitLabel);
    sample_exit_with(model, &mut t, &mut l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmcSummary {
    pub n: usize,
    pub total_rate: f64,
    pub mean_tau: f64,
    pub label_freqs: Vec<stats::Frequency>,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub tau_label_chi2: Chi2Test,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmcBatch {
    pub events: Vec<ExitEvent>,
    pub summary: KmcSummary,
}

pub fn batch_sample(model: &KmcModel, n: usize, seed: u64) -> Result<KmcBatch> {
    if n == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    let events: Vec<ExitEvent> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_exit(model, seed, i))
        .collect();
    let tau: Vec<f64> = events.iter().map(|e| e.tau).collect();
    let labels: Vec<usize> = events.iter().map(|e| e.label).collect();
    let m = model.labels.len();
    let mut counts = vec![0u64; m];
    for &l in &labels {
        counts[l] += 1;
    }
    let label_freqs = model
        .labels
        .iter()
        .zip(&counts)
        .map(|(label, &c)| {
            let f = c as f64 / n as f64;
            stats::Frequency {
                label: label.clone(),
                count: c,
                freq: f,
                se: stats::binomial_se(f, n),
            }
        })
        .collect();
    let ks = stats::ks_exponential(&tau, model.total);
    let summary = KmcSummary {
        n,
        total_rate: model.total,
        mean_tau: stats::mean(&tau),
        label_freqs,
        ks_statistic: ks,
        ks_p_value: stats::ks_p_value(ks, n),
        tau_label_chi2: stats::chi2_independence(&stats::quartile_table(&tau, &labels, m)),
    };
    Ok(KmcBatch { events, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model(rates: &[f64]) -> KmcModel {
        KmcModel::new(
            rates
                .iter()
                .enumerate()
                .map(|(i, &k)| (format!("z{}", i + 1), k))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_total_is_rejected() {
        assert!(matches!(
            KmcModel::new(vec![("a".into(), 0.0)]),
            Err(Error::NoExitChannel)
        ));
        assert!(KmcModel::new(vec![("a".into(), -1.0)]).is_err());
    }

    #[test]
    fn single_channel_mean() {
        let b = batch_sample(&model(&[2.5]), 1_000_000, 11).unwrap();
        assert!((b.summary.mean_tau * 2.5 - 1.0).abs() < 0.005);
        assert!(b.events.iter().all(|e| e.tau > 0.0 && e.label == 0));
    }

    #[test]
    fn symmetric_labels() {
        let k = PI * (-8.0f64).exp();
        let n = 100_000;
        let b = batch_sample(&model(&[k; 4]), n, 3).unwrap();
        let se = stats::binomial_se(0.25, n);
        for f in &b.summary.label_freqs {
            assert!((f.freq - 0.25).abs() < 3.0 * se, "{f:?}");
        }
        assert!((b.summary.mean_tau * 4.0 * k - 1.0).abs() < 4.0 / (n as f64).sqrt());
        assert!(b.summary.tau_label_chi2.p_value > 0.001);
        assert!(b.summary.ks_statistic <= stats::KS_CRIT_1PCT / (n as f64).sqrt());
    }

    #[test]
    fn weighted_labels() {
        let n = 100_000;
        let b = batch_sample(&model(&[1.0, 3.0]), n, 8).unwrap();
        let f = b.summary.label_freqs[1].freq;
        assert!((f - 0.75).abs() < 3.0 * stats::binomial_se(0.75, n));
    }

    #[test]
    fn zero_rate_channel_is_never_drawn() {
        let b = batch_sample(&model(&[0.0, 1.0, 0.0]), 10_000, 2).unwrap();
        assert!(b.events.iter().all(|e| e.label == 1));
    }

    #[test]
    fn deterministic_batches() {
        let m = model(&[1.0, 2.0]);
        let a = batch_sample(&m, 500, 42).unwrap();
        let b = batch_sample(&m, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.events, batch_sample(&m, 500, 43).unwrap().events);
    }

    #[test]
    fn scaling_rates_rescales_time() {
        let m = model(&[1.0, 2.0, 0.5]);
        let s = m.scaled(7.0).unwrap();
        for i in 0..1000 {
            let a = sample_exit(&m, 5, i);
            let b = sample_exit(&s, 5, i);
            assert_eq!(a.label, b.label);
            assert!((a.tau / 7.0 - b.tau).abs() <= 1e-12 * a.tau);
        }
    }
}
