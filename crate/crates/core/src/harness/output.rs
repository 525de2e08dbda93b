//! CSV tables and JSON summaries.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Cell, ComparisonReport, SweepTable};
use crate::error::Result;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn point(x: &[f64]) -> String {
    x.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";")
}

/// One line per numeric cell: `h,quantity,label,value,se,source`.
pub fn write_comparison_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h", "quantity", "label", "value", "se", "source"])?;
    let mut cell = |h: f64, q: &str, label: &str, c: &Option<Cell>| -> Result<()> {
        if let Some(c) = c {
            w.write_record([
                fmt(h),
                q.into(),
                label.into(),
                fmt(c.value),
                opt(c.se),
                c.source.as_str().into(),
            ])?;
        }
        Ok(())
    };
    for r in &report.rows {
        cell(r.h, "lambda", "", &Some(r.lambda_ek))?;
        cell(r.h, "lambda", "", &r.lambda_spec)?;
        cell(r.h, "lambda", "", &r.lambda_mc)?;
        cell(r.h, "prefactor_ratio", "", &r.prefactor_ratio)?;
        cell(r.h, "mass", "", &Some(r.mass_ek))?;
        cell(r.h, "mass", "", &r.mass_spec)?;
        for p in &r.patches {
            cell(r.h, "probability", &p.label, &Some(p.probability_ek))?;
            cell(r.h, "probability", &p.label, &p.probability_spec)?;
            cell(r.h, "probability", &p.label, &p.probability_mc)?;
            cell(r.h, "rate", &p.label, &p.rate_ek)?;
            cell(r.h, "rate", &p.label, &p.rate_spec)?;
            cell(r.h, "flux", &p.label, &p.flux_ek)?;
            cell(r.h, "flux_alt", &p.label, &p.flux_ek_alt)?;
            cell(r.h, "flux", &p.label, &p.flux_spec)?;
        }
    }
    for m in &report.mixed {
        cell(m.h, "mixed_lambda", &m.label, &Some(m.lambda_witten))?;
        cell(m.h, "mixed_lambda", &m.label, &Some(m.predicted))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_critical_points_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let Some(land) = &report.landscape else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "location",
        "value",
        "kind",
        "index",
        "face",
        "mu",
        "normal_derivative",
        "det_hess",
        "grad_norm",
    ])?;
    for c in &land.points {
        let b = c.boundary.as_ref();
        w.write_record([
            point(&c.location),
            fmt(c.value),
            format!("{:?}", c.kind).to_lowercase(),
            c.index.to_string(),
            b.map(|b| b.face.to_string()).unwrap_or_default(),
            opt(b.map(|b| b.mu)),
            opt(b.map(|b| b.normal_derivative)),
            fmt(c.det_hess),
            fmt(c.grad_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `index,tau,x,y,...,patch,restarts`.
pub fn write_exits_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let Some(mc) = &report.mc else {
        return Ok(());
    };
    let d = mc.config.start.len();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["index".to_string(), "tau".into()];
    header.extend(["x", "y", "z"].iter().take(d).map(|s| s.to_string()));
    header.extend(["patch".to_string(), "restarts".into()]);
    w.write_record(&header)?;
    for (i, s) in mc.samples.iter().enumerate() {
        let mut rec = vec![i.to_string(), fmt(s.tau)];
        rec.extend(s.exit_point.iter().map(|v| fmt(*v)));
        rec.extend([s.patch.clone(), s.restarts.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One line per (h, saddle) with the closed-form quantities.
pub fn write_rates_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "h",
        "saddle",
        "barrier",
        "prefactor",
        "rate",
        "probability",
        "lambda_asym",
        "mixed_eig_asym",
    ])?;
    for pred in &report.predictions {
        for s in &pred.saddles {
            w.write_record([
                fmt(pred.h),
                s.label.clone(),
                fmt(s.barrier),
                fmt(s.prefactor),
                fmt(s.rate),
                fmt(s.probability),
                fmt(pred.lambda),
                fmt(s.mixed_eigenvalue),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Grid coordinates and `d_a` from the minimum, one node per line.
pub fn write_agmon_field_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let Some(ag) = &report.agmon else {
        return Ok(());
    };
    let field = &ag.field;
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ["x", "y", "z"]
        .iter()
        .take(field.grid.dimension())
        .map(|s| s.to_string())
        .collect();
    header.push("d_a".into());
    w.write_record(&header)?;
    for node in 0..field.grid.len() {
        let mut rec: Vec<String> = field.grid.point(node).iter().map(|v| fmt(*v)).collect();
        rec.push(fmt(field.at(node)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Infimum of each saddle's Agmon field over the boundary away from its patch.
pub fn write_agmon_boundary_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let Some(ag) = &report.agmon else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "saddle",
        "inf_distance",
        "threshold",
        "margin",
        "eps_grid",
        "ok",
    ])?;
    for e in &ag.hypotheses.hypo1 {
        w.write_record([
            e.label.clone(),
            fmt(e.inf_distance),
            fmt(e.threshold),
            fmt(e.margin),
            fmt(e.eps_grid),
            e.ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_kmc_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let Some(k) = &report.kmc else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "tau", "label"])?;
    for (i, e) in k.events.iter().enumerate() {
        w.write_record([i.to_string(), fmt(e.tau), k.model.labels()[e.label].clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_assertions_csv(path: &Path, assertions: &[super::Assertion]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "passed", "detail"])?;
    for a in assertions {
        w.write_record([
            a.name.as_str(),
            if a.passed { "true" } else { "false" },
            a.detail.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "value",
        "h",
        "delta",
        "dt",
        "lambda",
        "lambda_se",
        "lambda_source",
        "lambda_ek",
        "ratio",
        "change",
        "change_ratio",
        "shift_se",
    ])?;
    for r in &table.rows {
        w.write_record([
            fmt(r.value),
            fmt(r.h),
            opt(r.delta),
            opt(r.dt),
            fmt(r.lambda.value),
            opt(r.lambda.se),
            r.lambda.source.as_str().into(),
            fmt(r.lambda_ek.value),
            fmt(r.ratio),
            opt(r.change),
            opt(r.change_ratio),
            opt(r.shift_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every table the report has data for and returns the paths.
pub fn write_report(dir: &Path, report: &ComparisonReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    write_json(&json, report)?;
    written.push(json);
    let assertions = dir.join("assertions.csv");
    write_assertions_csv(&assertions, &report.assertions)?;
    written.push(assertions);
    if report.landscape.is_some() {
        let p = dir.join("critical_points.csv");
        write_critical_points_csv(&p, report)?;
        written.push(p);
    }
    if !report.predictions.is_empty() {
        let p = dir.join("rates.csv");
        write_rates_csv(&p, report)?;
        written.push(p);
    }
    if report.agmon.is_some() {
        for (name, write) in [
            (
                "agmon_field.csv",
                write_agmon_field_csv as fn(&Path, &ComparisonReport) -> Result<()>,
            ),
            ("agmon_boundary.csv", write_agmon_boundary_csv),
        ] {
            let p = dir.join(name);
            write(&p, report)?;
            written.push(p);
        }
    }
    if !report.rows.is_empty() || !report.mixed.is_empty() {
        let p = dir.join("comparison.csv");
        write_comparison_csv(&p, report)?;
        written.push(p);
    }
    if report.mc.is_some() {
        let p = dir.join("exits.csv");
        write_exits_csv(&p, report)?;
        written.push(p);
    }
    if report.kmc.is_some() {
        let p = dir.join("kmc_events.csv");
        write_kmc_csv(&p, report)?;
        written.push(p);
    }
    Ok(written)
}

pub fn write_sweep(dir: &Path, table: &SweepTable) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("sweep.csv");
    write_sweep_csv(&csv, table)?;
    let json = dir.join("sweep.json");
    write_json(&json, table)?;
    Ok(vec![csv, json])
}
