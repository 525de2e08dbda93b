//! Euler-Maruyama integration of `dX = -grad f(X) dt + sqrt(h) dB`, first
//! exit from the box and batch estimates of the exit rate and exit law.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, OTHER};
use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, MAX_DIM};
use crate::rates::RatePrediction;
use crate::rng::{self, Substream};
use crate::spectral::FluxReport;
use crate::stats::{self, Chi2Test};

/// How crossings between two monitored states are detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExitTest {
    /// Only states at the grid times are checked.
    Discrete,
    /// Also accept a hidden crossing with the Brownian bridge probability
    /// `exp(-2 a b / (h dt))` per face.
    #[default]
    Bridge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub h: f64,
    pub dt: f64,
    pub max_steps: u64,
    pub seed: u64,
    pub start: Vec<f64>,
    /// Burn-in time `T_b`; zero starts the exit clock at `start`.
    pub burn_in: f64,
    pub record_path: bool,
    /// Each step uses `m` standard normals summed and scaled by `1/sqrt(m)`.
    /// A run with `(dt, 2m)` and one with `(dt/2, m)` then see the same
    /// Brownian path.
    pub noise_refine: u32,
    pub exit_test: ExitTest,
}

impl SimConfig {
    pub fn new(h: f64, dt: f64, start: Vec<f64>) -> Self {
        SimConfig {
            h,
            dt,
            max_steps: 100_000_000,
            seed: 0,
            start,
            burn_in: 0.0,
            record_path: false,
            noise_refine: 1,
            exit_test: ExitTest::Bridge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "h must be >= 0, got {}",
                self.h
            )));
        }
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "burn-in must be >= 0, got {}",
                self.burn_in
            )));
        }
        if self.noise_refine == 0 {
            return Err(Error::InvalidParameter("noise_refine must be >= 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// `20 / (smallest eigenvalue of Hess f at the minimum)`.
pub fn default_burn_in(p: &PotentialSpec, minimum: &[f64]) -> Result<f64> {
    let eig = p.hessian(minimum).symmetric_eigenvalues().min();
    if !(eig > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hessian at {minimum:?} is not positive definite (min eig {eig:.3e})"
        )));
    }
    Ok(20.0 / eig)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSample {
    pub tau: f64,
    pub exit_point: Vec<f64>,
    pub patch: String,
    pub restarts: u32,
    /// Steps taken, burn-in included.
    pub steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Vec<f64>>>,
}

/// One Euler-Maruyama step. `h = 0` gives the explicit Euler step of the
/// gradient flow.
pub fn step<R: Rng>(
    x: &[f64],
    p: &PotentialSpec,
    h: f64,
    dt: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if x.len() != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: x.len(),
        });
    }
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    advance(p, &mut y, &mut g, h, dt, 1, rng);
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(Error::Diverged { step: 1 })
    }
}

fn advance<R: Rng>(
    p: &PotentialSpec,
    x: &mut [f64],
    g: &mut [f64],
    h: f64,
    dt: f64,
    m: u32,
    rng: &mut R,
) {
    p.gradient_into(x, g);
    for (xi, gi) in x.iter_mut().zip(g.iter()) {
        *xi -= gi * dt;
    }
    if h > 0.0 {
        // sub-step-major order so that m sub-draws replay m finer steps
        let mut xi = [0.0; MAX_DIM];
        for _ in 0..m {
            for v in xi[..x.len()].iter_mut() {
                *v += rng.sample::<f64, _>(StandardNormal);
            }
        }
        let amp = (h * dt / m as f64).sqrt();
        for (y, v) in x.iter_mut().zip(&xi) {
            *y += amp * v;
        }
    }
}

struct Crossing {
    fraction: f64,
    axis: usize,
    upper: bool,
}

/// Earliest face crossed on the segment `a -> b` (with `b` outside).
fn crossing(dom: &DomainSpec, a: &[f64], b: &[f64]) -> Crossing {
    let mut best = Crossing {
        fraction: f64::INFINITY,
        axis: 0,
        upper: false,
    };
    for i in 0..a.len() {
        for (upper, face) in [(false, dom.lower()[i]), (true, dom.upper()[i])] {
            let outside = if upper { b[i] > face } else { b[i] < face };
            if outside {
                let s = ((face - a[i]) / (b[i] - a[i])).clamp(0.0, 1.0);
                if s < best.fraction {
                    best = Crossing {
                        fraction: s,
                        axis: i,
                        upper,
                    };
                }
            }
        }
    }
    best
}

/// Face hit by a bridge between two inside states, if any.
fn bridge_crossing<R: Rng>(
    dom: &DomainSpec,
    a: &[f64],
    b: &[f64],
    var: f64,
    rng: &mut R,
) -> Option<(usize, bool)> {
    if !(var > 0.0) {
        return None;
    }
    let mut probs = [(0usize, false, 0.0f64); 2 * MAX_DIM];
    let mut n = 0;
    let mut survive = 1.0;
    for i in 0..a.len() {
        for (upper, face) in [(false, dom.lower()[i]), (true, dom.upper()[i])] {
            let da = (a[i] - face).abs();
            let db = (b[i] - face).abs();
            let e = 2.0 * da * db / var;
            if e < 40.0 {
                let q = (-e).exp();
                probs[n] = (i, upper, q);
                n += 1;
                survive *= 1.0 - q;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let hit = 1.0 - survive;
    let u: f64 = rng.random();
    if u >= hit {
        return None;
    }
    let total: f64 = probs[..n].iter().map(|t| t.2).sum();
    let mut target = u / hit * total;
    for &(i, upper, q) in &probs[..n] {
        if target < q {
            return Some((i, upper));
        }
        target -= q;
    }
    probs[..n].last().map(|t| (t.0, t.1))
}

enum Phase {
    Stayed,
    Left { point: Vec<f64>, fraction: f64 },
}

struct Walker<'a, R: Rng, S: Rng> {
    p: &'a PotentialSpec,
    dom: &'a DomainSpec,
    cfg: &'a SimConfig,
    noise: R,
    bridge: S,
    steps: u64,
    time: f64,
    grad: [f64; MAX_DIM],
}

impl<'a, R: Rng, S: Rng> Walker<'a, R, S> {
    /// Advances `x` by one step and reports whether the box was left.
    fn step(&mut self, x: &mut [f64], prev: &mut [f64]) -> Result<Phase> {
        if self.steps >= self.cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                steps: self.steps,
                time: self.time,
            });
        }
        let d = x.len();
        prev.copy_from_slice(x);
        advance(
            self.p,
            x,
            &mut self.grad[..d],
            self.cfg.h,
            self.cfg.dt,
            self.cfg.noise_refine,
            &mut self.noise,
        );
        self.steps += 1;
        self.time += self.cfg.dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: self.steps });
        }
        if !self.dom.contains(x) {
            let c = crossing(self.dom, prev, x);
            return Ok(Phase::Left {
                point: self.exit_point(prev, x, c.fraction, c.axis, c.upper),
                fraction: c.fraction,
            });
        }
        if self.cfg.exit_test == ExitTest::Bridge {
            let var = self.cfg.h * self.cfg.dt;
            if let Some((axis, upper)) = bridge_crossing(self.dom, prev, x, var, &mut self.bridge) {
                return Ok(Phase::Left {
                    point: self.exit_point(prev, x, 0.5, axis, upper),
                    fraction: 0.5,
                });
            }
        }
        Ok(Phase::Stayed)
    }

    fn exit_point(&self, a: &[f64], b: &[f64], s: f64, axis: usize, upper: bool) -> Vec<f64> {
        let mut y: Vec<f64> = a.iter().zip(b).map(|(u, v)| u + s * (v - u)).collect();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = yi.clamp(self.dom.lower()[i], self.dom.upper()[i]);
        }
        y[axis] = if upper {
            self.dom.upper()[axis]
        } else {
            self.dom.lower()[axis]
        };
        y
    }
}

/// Trajectory `index` of the batch keyed by `cfg.seed`.
pub fn simulate_exit_indexed(
    cfg: &SimConfig,
    p: &PotentialSpec,
    dom: &DomainSpec,
    index: u64,
) -> Result<ExitSample> {
    cfg.validate()?;
    let d = p.dimension();
    if dom.dimension() != d || cfg.start.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if dom.dimension() != d {
                dom.dimension()
            } else {
                cfg.start.len()
            },
        });
    }
    if !dom.strictly_inside(&cfg.start, 0.0) {
        return Err(Error::InvalidParameter(format!(
            "start {:?} is not strictly inside the box",
            cfg.start
        )));
    }
    let mut w = Walker {
        p,
        dom,
        cfg,
        noise: rng::stream(cfg.seed, index, Substream::Trajectory),
        bridge: rng::stream(cfg.seed, index, Substream::Bridge),
        steps: 0,
        time: 0.0,
        grad: [0.0; MAX_DIM],
    };
    let mut x = cfg.start.clone();
    let mut prev = vec![0.0; d];
    let mut restarts = 0u32;
    let burn_steps = (cfg.burn_in / cfg.dt).round() as u64;
    if burn_steps > 0 {
        let mut k = 0;
        while k < burn_steps {
            match w.step(&mut x, &mut prev)? {
                Phase::Stayed => k += 1,
                Phase::Left { .. } => {
                    restarts += 1;
                    x.copy_from_slice(&cfg.start);
                    k = 0;
                }
            }
        }
    }
    let mut path = cfg.record_path.then(|| vec![x.clone()]);
    let mut n = 0u64;
    loop {
        let phase = w.step(&mut x, &mut prev)?;
        if let Some(path) = path.as_mut() {
            path.push(x.clone());
        }
        if let Phase::Left { point, fraction } = phase {
            let tau = (n as f64 + fraction) * cfg.dt;
            let patch = dom.patch_label(&point).to_string();
            return Ok(ExitSample {
                tau: tau.max(f64::MIN_POSITIVE),
                exit_point: point,
                patch,
                restarts,
                steps: w.steps,
                path,
            });
        }
        n += 1;
    }
}

pub fn simulate_exit(cfg: &SimConfig, p: &PotentialSpec, dom: &DomainSpec) -> Result<ExitSample> {
    simulate_exit_indexed(cfg, p, dom, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchEstimate {
    pub label: String,
    pub count: u64,
    pub freq: f64,
    pub se: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `freq / mean(tau)`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitStatistics {
    pub h: f64,
    pub dt: f64,
    pub n: usize,
    pub mean_tau: f64,
    pub lambda_hat: f64,
    pub lambda_se: f64,
    /// Declared patches in domain order, then `other`.
    pub patches: Vec<PatchEstimate>,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_p_value: f64,
    pub chi2: Chi2Test,
    pub restarts: u64,
    pub mean_steps: f64,
}

impl ExitStatistics {
    pub fn patch(&self, label: &str) -> Option<&PatchEstimate> {
        self.patches.iter().find(|p| p.label == label)
    }

    pub fn ks_passes(&self) -> bool {
        self.ks_statistic <= self.ks_critical
    }
}

fn wilson(p: f64, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn summarize(samples: &[ExitSample], dom: &DomainSpec, h: f64, dt: f64) -> ExitStatistics {
    let n = samples.len();
    let mut labels = dom.labels();
    labels.push(OTHER.to_string());
    let tau: Vec<f64> = samples.iter().map(|s| s.tau).collect();
    let cat: Vec<usize> = samples
        .iter()
        .map(|s| {
            labels
                .iter()
                .position(|l| *l == s.patch)
                .unwrap_or(labels.len() - 1)
        })
        .collect();
    let mut counts = vec![0u64; labels.len()];
    for &c in &cat {
        counts[c] += 1;
    }
    let mean_tau = stats::mean(&tau);
    let lambda_hat = 1.0 / mean_tau;
    let patches = labels
        .into_iter()
        .zip(&counts)
        .map(|(label, &count)| {
            let freq = count as f64 / n as f64;
            let (ci_low, ci_high) = wilson(freq, n);
            PatchEstimate {
                label,
                count,
                freq,
                se: stats::binomial_se(freq, n),
                ci_low,
                ci_high,
                rate: freq / mean_tau,
            }
        })
        .collect();
    let ks = stats::ks_exponential(&tau, lambda_hat);
    ExitStatistics {
        h,
        dt,
        n,
        mean_tau,
        lambda_hat,
        lambda_se: lambda_hat / (n as f64).sqrt(),
        patches,
        ks_statistic: ks,
        ks_critical: stats::KS_CRIT_1PCT / (n as f64).sqrt(),
        ks_p_value: stats::ks_p_value(ks, n),
        chi2: stats::chi2_independence(&stats::quartile_table(&tau, &cat, counts.len())),
        restarts: samples.iter().map(|s| u64::from(s.restarts)).sum(),
        mean_steps: samples.iter().map(|s| s.steps as f64).sum::<f64>() / n as f64,
    }
}

/// Runs `n` independent exits, trajectory `i` on its own substreams.
pub fn sample_exits(
    cfg: &SimConfig,
    p: &PotentialSpec,
    dom: &DomainSpec,
    n: usize,
) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit_indexed(cfg, p, dom, i))
        .collect()
}

pub fn estimate(
    cfg: &SimConfig,
    p: &PotentialSpec,
    dom: &DomainSpec,
    n: usize,
) -> Result<ExitStatistics> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 100 exits, got {n}"
        )));
    }
    let samples = sample_exits(cfg, p, dom, n)?;
    Ok(summarize(&samples, dom, cfg.h, cfg.dt))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub mc: f64,
    pub mc_se: f64,
    pub ek: Option<f64>,
    pub spectral: Option<f64>,
    /// `(mc - spectral) / mc_se`, else against `ek`.
    pub z_score: Option<f64>,
}

/// `lambda` and per-patch probabilities next to the closed-form and
/// discrete predictions, when given.
pub fn compare(
    est: &ExitStatistics,
    ek: Option<&RatePrediction>,
    spectral: Option<&FluxReport>,
) -> Vec<ComparisonRow> {
    let row = |quantity: String, mc: f64, se: f64, e: Option<f64>, s: Option<f64>| {
        let reference = s.or(e);
        ComparisonRow {
            quantity,
            mc,
            mc_se: se,
            ek: e,
            spectral: s,
            z_score: reference.filter(|_| se > 0.0).map(|r| (mc - r) / se),
        }
    };
    let mut rows = vec![row(
        "lambda".into(),
        est.lambda_hat,
        est.lambda_se,
        ek.map(|e| e.lambda),
        spectral.map(|s| s.lambda),
    )];
    for pe in &est.patches {
        let e = ek.and_then(|e| {
            if pe.label == OTHER {
                Some(e.other_probability)
            } else {
                e.saddles
                    .iter()
                    .find(|s| s.label == pe.label)
                    .map(|s| s.probability)
            }
        });
        let s = spectral
            .and_then(|s| s.patch(&pe.label))
            .map(|p| p.probability);
        rows.push(row(format!("p({})", pe.label), pe.freq, pe.se, e, s));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryPatch, Face};

    fn cl2(rho: f64) -> (PotentialSpec, DomainSpec) {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let mut d = DomainSpec::square(1.0).unwrap();
        for (label, axis, upper) in [
            ("a", 0, true),
            ("b", 1, true),
            ("c", 0, false),
            ("d", 1, false),
        ] {
            let face = Face::new(axis, upper);
            let mut center = vec![0.0, 0.0];
            center[axis] = face.sign();
            d.add_patch(BoundaryPatch {
                label: label.into(),
                face,
                center,
                radius: rho,
            })
            .unwrap();
        }
        (p, d)
    }

    #[test]
    fn quadratic_noise_free_step_is_exact() {
        let p = PotentialSpec::isotropic_quadratic(2, 1.0).unwrap();
        let mut r = rng::stream(0, 0, Substream::Trajectory);
        let y = step(&[0.3, -2.0], &p, 0.0, 0.1, &mut r).unwrap();
        assert_eq!(y, vec![0.9 * 0.3, 0.9 * -2.0]);
    }

    #[test]
    fn gradient_flow_reaches_minimum() {
        let (p, _) = cl2(1.0);
        let mut r = rng::stream(0, 0, Substream::Trajectory);
        let mut x = vec![0.5, 0.5];
        for _ in 0..5000 {
            x = step(&x, &p, 0.0, 1e-2, &mut r).unwrap();
        }
        assert!(x.iter().all(|v| v.abs() < 1e-10), "{x:?}");
    }

    #[test]
    fn divergence_is_reported() {
        let p =
            PotentialSpec::polynomial(1, vec![crate::potential::Monomial::new(1.0, &[4])]).unwrap();
        let d = DomainSpec::new(vec![-1e307], vec![1e307]).unwrap();
        let mut cfg = SimConfig::new(0.0, 1.0, vec![1e100]);
        cfg.max_steps = 10;
        assert!(matches!(
            simulate_exit(&cfg, &p, &d),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn noise_free_run_never_exits() {
        let (p, d) = cl2(1.0);
        let mut cfg = SimConfig::new(0.0, 1e-3, vec![0.5, 0.5]);
        cfg.max_steps = 10_000;
        match simulate_exit(&cfg, &p, &d) {
            Err(Error::MaxStepsExceeded { steps, time }) => {
                assert_eq!(steps, 10_000);
                assert!((time - 10.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exit_lands_on_one_face() {
        let (p, d) = cl2(0.3);
        let mut cfg = SimConfig::new(0.5, 1e-3, vec![0.0, 0.0]);
        cfg.seed = 9;
        cfg.burn_in = 2.0;
        for i in 0..20 {
            let s = simulate_exit_indexed(&cfg, &p, &d, i).unwrap();
            let on: Vec<_> = s
                .exit_point
                .iter()
                .filter(|v| (v.abs() - 1.0).abs() < 1e-9)
                .collect();
            assert_eq!(on.len(), 1, "{s:?}");
            assert!(s.exit_point.iter().all(|v| v.abs() <= 1.0));
            assert!(s.tau > 0.0);
            assert!(["a", "b", "c", "d", OTHER].contains(&s.patch.as_str()));
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let (p, d) = cl2(1.0);
        let mut cfg = SimConfig::new(0.8, 1e-3, vec![0.2, -0.1]);
        cfg.seed = 4;
        cfg.record_path = true;
        let a = simulate_exit_indexed(&cfg, &p, &d, 3).unwrap();
        let b = simulate_exit_indexed(&cfg, &p, &d, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_exit_indexed(&cfg, &p, &d, 4).unwrap());
    }

    #[test]
    fn refined_noise_matches_two_half_steps() {
        let p = PotentialSpec::constant(2, 0.0).unwrap();
        let mut coarse = rng::stream(1, 0, Substream::Trajectory);
        let mut fine = rng::stream(1, 0, Substream::Trajectory);
        let (mut x, mut y) = (vec![0.0; 2], vec![0.0; 2]);
        let mut g = vec![0.0; 2];
        for _ in 0..100 {
            advance(&p, &mut x, &mut g, 1.0, 2e-3, 2, &mut coarse);
            advance(&p, &mut y, &mut g, 1.0, 1e-3, 1, &mut fine);
            advance(&p, &mut y, &mut g, 1.0, 1e-3, 1, &mut fine);
        }
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_rate_matches_half_plane_formula() {
        let dom = DomainSpec::new(vec![-1.0], vec![1.0]).unwrap();
        let mut r = rng::stream(2, 0, Substream::Bridge);
        let (a, b, var) = ([0.9], [0.95], 0.01);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| bridge_crossing(&dom, &a, &b, var, &mut r).is_some())
            .count();
        let p = (-2.0 * 0.1 * 0.05 / var).exp();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn estimate_rejects_small_batches() {
        let (p, d) = cl2(1.0);
        let cfg = SimConfig::new(0.5, 1e-3, vec![0.0, 0.0]);
        assert!(estimate(&cfg, &p, &d, 50).is_err());
    }

    #[test]
    fn summary_identities() {
        let (p, d) = cl2(0.4);
        let mut cfg = SimConfig::new(1.0, 2e-3, vec![0.0, 0.0]);
        cfg.burn_in = 1.0;
        let est = estimate(&cfg, &p, &d, 200).unwrap();
        let fsum: f64 = est.patches.iter().map(|p| p.freq).sum();
        let ksum: f64 = est.patches.iter().map(|p| p.rate).sum();
        assert!((fsum - 1.0).abs() < 1e-12);
        assert!((ksum - est.lambda_hat).abs() < 1e-12 * est.lambda_hat);
        assert_eq!(est.patches.last().unwrap().label, OTHER);
        assert!(est
            .patches
            .iter()
            .all(|p| p.ci_low <= p.freq && p.freq <= p.ci_high));
        let rows = compare(&est, None, None);
        assert_eq!(rows.len(), 1 + est.patches.len());
        assert!(rows.iter().all(|r| r.z_score.is_none()));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let (p, d) = cl2(1.0);
        let mut cfg = SimConfig::new(1.0, 2e-3, vec![0.0, 0.0]);
        cfg.seed = 12;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| estimate(&cfg, &p, &d, 120)).unwrap();
        let b = four.install(|| estimate(&cfg, &p, &d, 120)).unwrap();
        assert_eq!(a, b);
    }
}
