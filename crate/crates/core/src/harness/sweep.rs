use rayon::prelude::*;
use serde::Serialize;

use super::{
    landscape_stage, sim_config, spectral_solve, Assertion, Cell, ExperimentConfig, Source,
    SweepAxis,
};
use crate::error::{Error, Result};
use crate::langevin;
use crate::rates;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub h: f64,
    pub delta: Option<f64>,
    pub dt: Option<f64>,
    pub lambda: Cell,
    pub lambda_ek: Cell,
    /// `lambda / lambda_ek`.
    pub ratio: f64,
    /// `lambda - lambda(previous row)`.
    pub change: Option<f64>,
    /// Previous `|change|` over this one.
    pub change_ratio: Option<f64>,
    /// `|change|` in standard errors of the previous row.
    pub shift_se: Option<f64>,
    pub identity_rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log lambda` against `1/h` (h sweeps only).
    pub slope: Option<f64>,
    pub slope_ek: Option<f64>,
    pub target_slope: Option<f64>,
    pub assertions: Vec<Assertion>,
}

impl SweepTable {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

fn fill_changes(rows: &mut [SweepRow]) {
    for i in 1..rows.len() {
        let change = rows[i].lambda.value - rows[i - 1].lambda.value;
        rows[i].change = Some(change);
        rows[i].shift_se = rows[i - 1].lambda.se.map(|se| change.abs() / se);
        if let Some(prev) = rows[i - 1].change {
            rows[i].change_ratio = Some(prev.abs() / change.abs());
        }
    }
}

/// Reruns the stage that depends on `axis` once per value.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one value".into(),
        ));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "sweep values must be > 0, got {v}"
        )));
    }
    cfg.validate()?;
    let (ctx, _) = landscape_stage(cfg).map_err(|e| e.in_stage("landscape"))?;
    let mut assertions = Vec::new();
    let mut rows: Vec<SweepRow> = match axis {
        SweepAxis::H | SweepAxis::Delta => {
            let delta0 = cfg.spectral.delta[0];
            values
                .par_iter()
                .map(|&v| {
                    let (h, delta) = if axis == SweepAxis::H {
                        (v, delta0)
                    } else {
                        (cfg.sweep.h, v)
                    };
                    let rep = spectral_solve(cfg, &ctx, h, delta)?;
                    let ek = rates::lambda_h_asymptotic(&ctx.table, h)?;
                    Ok(SweepRow {
                        value: v,
                        h,
                        delta: Some(delta),
                        dt: None,
                        lambda: Cell::new(rep.lambda, Source::Spectral),
                        lambda_ek: Cell::new(ek, Source::Ek),
                        ratio: rep.lambda / ek,
                        change: None,
                        change_ratio: None,
                        shift_se: None,
                        identity_rel_err: Some(rep.identity_rel_err),
                    })
                })
                .collect::<Result<_>>()
                .map_err(|e: Error| e.in_stage("spectral"))?
        }
        SweepAxis::Dt => {
            let base = sim_config(cfg, &ctx)?;
            let finest = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let ek = rates::lambda_h_asymptotic(&ctx.table, base.h)?;
            let mut out = Vec::with_capacity(values.len());
            for &dt in values {
                let mut sim = base.clone();
                sim.dt = dt;
                let m = (dt / finest).round();
                // shared Brownian paths when dt is a multiple of the finest step
                sim.noise_refine = if (dt / finest - m).abs() < 1e-9 {
                    m as u32
                } else {
                    1
                };
                let est = langevin::estimate(&sim, &ctx.p, &ctx.dom, cfg.langevin.n)
                    .map_err(|e| e.in_stage("langevin"))?;
                out.push(SweepRow {
                    value: dt,
                    h: base.h,
                    delta: None,
                    dt: Some(dt),
                    lambda: Cell::with_se(est.lambda_hat, est.lambda_se, Source::Mc),
                    lambda_ek: Cell::new(ek, Source::Ek),
                    ratio: est.lambda_hat / ek,
                    change: None,
                    change_ratio: None,
                    shift_se: None,
                    identity_rel_err: None,
                });
            }
            out
        }
    };
    fill_changes(&mut rows);
    let (mut slope, mut slope_ek, mut target) = (None, None, None);
    match axis {
        SweepAxis::H if rows.len() >= 2 => {
            let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.h).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.lambda.value.ln()).collect();
            let ye: Vec<f64> = rows.iter().map(|r| r.lambda_ek.value.ln()).collect();
            let s = stats::linear_fit(&x, &y).0;
            let t = -2.0 * ctx.table.barrier();
            slope = Some(s);
            slope_ek = Some(stats::linear_fit(&x, &ye).0);
            target = Some(t);
            let rel = (s - t).abs() / t.abs();
            assertions.push(Assertion {
                name: "sweep_exponent_law".into(),
                passed: rel <= 0.02,
                detail: format!("slope {s:.5} vs {t:.5} (rel err {rel:.2e})"),
            });
        }
        SweepAxis::Delta if rows.len() >= 3 => {
            let shrinking = rows.iter().filter_map(|r| r.change_ratio).all(|q| q > 1.0);
            let ratios: Vec<String> = rows
                .iter()
                .filter_map(|r| r.change_ratio)
                .map(|q| format!("{q:.3}"))
                .collect();
            assertions.push(Assertion {
                name: "sweep_delta_convergence".into(),
                passed: shrinking,
                detail: format!("successive change ratios {}", ratios.join(", ")),
            });
        }
        SweepAxis::Dt if rows.len() >= 2 => {
            let worst = rows.iter().filter_map(|r| r.shift_se).fold(0.0, f64::max);
            assertions.push(Assertion {
                name: "sweep_dt_shift".into(),
                passed: worst < 1.0,
                detail: format!("largest shift between successive dt values {worst:.3} se"),
            });
        }
        _ => {}
    }
    for r in &rows {
        if let Some(e) = r.identity_rel_err {
            if e > 1e-10 {
                assertions.push(Assertion {
                    name: "sweep_rate_identity".into(),
                    passed: false,
                    detail: format!("identity error {e:.3e} at value {}", r.value),
                });
            }
        }
    }
    Ok(SweepTable {
        axis,
        rows,
        slope,
        slope_ek,
        target_slope: target,
        assertions,
    })
}
