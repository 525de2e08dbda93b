use super::{Assertion, ComparisonReport, HRow};
use crate::domain::OTHER;
use crate::stats;

const SLOPE_REL_TOL: f64 = 0.02;
const PREFACTOR_BAND: (f64, f64) = (0.5, 1.5);
const IDENTITY_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-6;
const SUPPRESSION_BAND: (f64, f64) = (0.6, 1.6);
const MIXED_BAND: (f64, f64) = (0.5, 1.5);
const AGMON_REL_TOL: f64 = 0.02;
const Z_MAX: f64 = 3.0;
const CHI2_MIN_P: f64 = 0.01;
const HALVING_MAX_SE: f64 = 1.0;
const EQUIVALENT_REL_TOL: f64 = 1e-8;

fn push(out: &mut Vec<Assertion>, name: &str, passed: bool, detail: String) {
    out.push(Assertion {
        name: name.into(),
        passed,
        detail,
    });
}

fn in_band(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

/// Rows with a spectral solution, from high to low `h`.
fn spectral_rows(report: &ComparisonReport) -> Vec<&HRow> {
    report
        .rows
        .iter()
        .filter(|r| r.lambda_spec.is_some())
        .collect()
}

/// Value at the smallest and at the largest `h`.
fn ends(rows: &[&HRow], f: impl Fn(&HRow) -> Option<f64>) -> Option<(f64, f64, f64, f64)> {
    let lo = rows.last()?;
    let hi = rows.first()?;
    Some((lo.h, f(lo)?, hi.h, f(hi)?))
}

pub(super) fn evaluate(report: &ComparisonReport, expected_counts: &[usize]) -> Vec<Assertion> {
    let mut out = Vec::new();
    let Some(land) = &report.landscape else {
        return out;
    };
    let table = &land.table;
    push(
        &mut out,
        "assumption",
        land.assumptions.a_ok,
        format!(
            "{} violations, min normal derivative {:.3e}",
            land.assumptions.violations.len(),
            land.assumptions.min_normal_derivative
        ),
    );
    push(
        &mut out,
        "hypo2",
        land.hypo2_ok,
        format!(
            "f(z1) - f(x0) = {:.6} vs f(zN) - f(z1) = {:.6}",
            land.hypo2_lhs, land.hypo2_rhs
        ),
    );

    if !expected_counts.is_empty() {
        push(
            &mut out,
            "generalized_counts",
            land.counts.m_total == expected_counts,
            format!(
                "m = {:?}, expected {:?}",
                land.counts.m_total, expected_counts
            ),
        );
    }

    let rows = spectral_rows(report);
    let barrier = table.barrier();
    if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.h).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.lambda_spec.expect("filtered").value.ln())
            .collect();
        let (slope, _) = stats::linear_fit(&x, &y);
        let target = -2.0 * barrier;
        let rel = (slope - target).abs() / target.abs();
        push(
            &mut out,
            "exponent_law",
            rel <= SLOPE_REL_TOL,
            format!("slope {slope:.5} vs {target:.5} (rel err {rel:.2e})"),
        );
        if let Some((h_lo, r_lo, h_hi, r_hi)) = ends(&rows, |r| r.prefactor_ratio.map(|c| c.value))
        {
            let ok = in_band(r_lo, PREFACTOR_BAND) && (r_lo - 1.0).abs() < (r_hi - 1.0).abs();
            push(
                &mut out,
                "prefactor_trend",
                ok,
                format!(
                    "lambda_spec / lambda_ek = {r_lo:.5} at h = {h_lo}, {r_hi:.5} at h = {h_hi}"
                ),
            );
        }
    }
    if let Some(lo) = rows.last() {
        let mut ok = true;
        let mut detail = Vec::new();
        for s in &table.saddles[..table.n0] {
            let Some(pr) = lo.patches.iter().find(|p| p.label == s.label) else {
                continue;
            };
            if let (Some(fs), Some(fe), Some(fa)) = (pr.flux_spec, pr.flux_ek, pr.flux_ek_alt) {
                let r = fs.value / fe.value;
                let ra = fs.value / fa.value;
                ok &= in_band(r, PREFACTOR_BAND) && !in_band(ra, PREFACTOR_BAND);
                detail.push(format!("{}: {r:.4} (alt {ra:.4})", s.label));
            }
        }
        push(
            &mut out,
            "flux_coefficient",
            ok && !detail.is_empty(),
            format!(
                "discrete / predicted flux at h = {}: {}",
                lo.h,
                detail.join(", ")
            ),
        );
    }
    if !rows.is_empty() {
        let worst = rows
            .iter()
            .filter_map(|r| r.identity_rel_err)
            .fold(0.0, f64::max);
        push(
            &mut out,
            "rate_identity",
            worst <= IDENTITY_TOL,
            format!("max |sum k - lambda| / lambda = {worst:.3e}"),
        );
        exit_symmetry(report, &rows, &mut out);
        suppression(report, &rows, &mut out);
    }
    if let Some(c) = &report.small_eig {
        push(
            &mut out,
            "small_eig_count",
            c.count == c.expected,
            format!(
                "{} eigenvalues below {:.3e} at h = {}, expected {}",
                c.count, c.threshold, c.h, c.expected
            ),
        );
    }
    if report.mixed.len() >= 2 {
        let mut m: Vec<_> = report.mixed.iter().collect();
        m.sort_by(|a, b| a.h.total_cmp(&b.h));
        let lo = m[0];
        let hi = m[m.len() - 1];
        let ok = in_band(lo.ratio, MIXED_BAND) && (lo.ratio - 1.0).abs() < (hi.ratio - 1.0).abs();
        push(
            &mut out,
            "mixed_eigenvalue_law",
            ok,
            format!(
                "ratio {:.5} at h = {}, {:.5} at h = {}",
                lo.ratio, lo.h, hi.ratio, hi.h
            ),
        );
    } else if let Some(r) = report.mixed.first() {
        push(
            &mut out,
            "mixed_eigenvalue_law",
            in_band(r.ratio, MIXED_BAND),
            format!("ratio {:.5} at h = {}", r.ratio, r.h),
        );
    }
    if let Some(a) = &report.agmon {
        let worst = a
            .distances
            .iter()
            .filter(|d| d.from == table.minimum.location)
            .map(|d| d.rel_err)
            .fold(0.0, f64::max);
        push(
            &mut out,
            "agmon_distance",
            worst <= AGMON_REL_TOL,
            format!("max rel err of d_a(x0, z) vs f(z) - f(x0): {worst:.3e}"),
        );
        let h1 = &a.hypotheses;
        let worst_margin = h1
            .hypo1
            .iter()
            .map(|e| e.margin)
            .fold(f64::INFINITY, f64::min);
        push(
            &mut out,
            "hypo1",
            h1.hypo1_ok,
            format!(
                "smallest margin {worst_margin:.4e} (eps_grid {:.3e})",
                a.eps_grid
            ),
        );
        let pr = &a.properties;
        push(
            &mut out,
            "agmon_properties",
            pr.passed,
            format!(
                "{} pairs, lower bound margin {:.3e}, triangle margin {:.3e}, eps_grid {:.3e}",
                pr.n_pairs, pr.worst_lower_bound_margin, pr.worst_triangle_margin, pr.eps_grid
            ),
        );
    }
    if let Some(mc) = &report.mc {
        mc_checks(report, mc, &mut out);
    }
    if let Some(k) = &report.kmc {
        let n = k.summary.n;
        let crit = stats::KS_CRIT_1PCT / (n as f64).sqrt();
        push(
            &mut out,
            "kmc_ks",
            k.summary.ks_statistic <= crit,
            format!("D = {:.4e}, critical {:.4e}", k.summary.ks_statistic, crit),
        );
        let mut ok = true;
        for (f, &p) in k.summary.label_freqs.iter().zip(&k.expected) {
            ok &= (f.freq - p).abs() <= Z_MAX * stats::binomial_se(p, n) + 1e-12;
        }
        push(
            &mut out,
            "kmc_frequencies",
            ok,
            format!("{} channels within 3 se", k.expected.len()),
        );
    }
    out
}

/// Saddles with the same level, `|mu|` and `|det Hess f|` must get the same
/// spectral exit probability. When every saddle is at the lowest level the
/// probabilities must also equal the closed-form ones.
fn exit_symmetry(report: &ComparisonReport, rows: &[&HRow], out: &mut Vec<Assertion>) {
    let table = &report.landscape.as_ref().expect("checked").table;
    let same = |a: f64, b: f64| (a - b).abs() <= EQUIVALENT_REL_TOL * a.abs().max(b.abs()).max(1.0);
    let mut worst: f64 = 0.0;
    for row in rows {
        let prob = |label: &str| {
            row.patches
                .iter()
                .find(|p| p.label == label)
                .and_then(|p| p.probability_spec)
                .map(|c| c.value)
        };
        for (i, a) in table.saddles.iter().enumerate() {
            for b in &table.saddles[i + 1..] {
                if same(a.value, b.value)
                    && same(a.abs_mu, b.abs_mu)
                    && same(a.abs_det_hess, b.abs_det_hess)
                {
                    if let (Some(pa), Some(pb)) = (prob(&a.label), prob(&b.label)) {
                        worst = worst.max((pa - pb).abs());
                    }
                }
            }
        }
        if table.n0 == table.saddles.len() {
            for pr in &row.patches {
                if let Some(ps) = pr.probability_spec {
                    worst = worst.max((ps.value - pr.probability_ek.value).abs());
                }
            }
        }
    }
    push(
        out,
        "exit_symmetry",
        worst <= SYMMETRY_TOL,
        format!("max deviation of equivalent spectral exit probabilities {worst:.3e}"),
    );
}

/// `(k_high / k_low) / ((a_high / a_low) e^{-2 (f_high - f_low)/h})` with
/// `a = |mu| / sqrt|det Hess f|`.
fn suppression(report: &ComparisonReport, rows: &[&HRow], out: &mut Vec<Assertion>) {
    let table = &report.landscape.as_ref().expect("checked").table;
    if table.n0 == table.saddles.len() || rows.len() < 2 {
        return;
    }
    let low = &table.saddles[0];
    let a = |s: &crate::landscape::Saddle| s.abs_mu / s.abs_det_hess.sqrt();
    let ratio = |row: &HRow, high: &crate::landscape::Saddle| {
        let k = |label: &str| {
            row.patches
                .iter()
                .find(|p| p.label == label)
                .and_then(|p| p.rate_spec)
                .map(|c| c.value)
        };
        let predicted = a(high) / a(low) * (-2.0 * (high.value - low.value) / row.h).exp();
        Some(k(&high.label)? / k(&low.label)? / predicted)
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for high in &table.saddles[table.n0..] {
        let (lo, hi) = (rows[rows.len() - 1], rows[0]);
        match (ratio(lo, high), ratio(hi, high)) {
            (Some(r_lo), Some(r_hi)) => {
                ok &= in_band(r_lo, SUPPRESSION_BAND) && (r_lo - 1.0).abs() < (r_hi - 1.0).abs();
                detail.push(format!(
                    "{}: {r_lo:.4} at h = {}, {r_hi:.4} at h = {}",
                    high.label, lo.h, hi.h
                ));
            }
            _ => ok = false,
        }
    }
    push(out, "higher_saddle_suppression", ok, detail.join("; "));
}

fn mc_checks(report: &ComparisonReport, mc: &super::McSection, out: &mut Vec<Assertion>) {
    let s = &mc.stats;
    let n = s.n;
    push(
        out,
        "mc_ks",
        s.ks_passes(),
        format!("D = {:.4e}, critical {:.4e}", s.ks_statistic, s.ks_critical),
    );
    push(
        out,
        "mc_independence",
        s.chi2.p_value > CHI2_MIN_P,
        format!(
            "chi2 = {:.3} on {} dof, p = {:.4}",
            s.chi2.statistic, s.chi2.dof, s.chi2.p_value
        ),
    );
    let row = report.row(s.h);
    let mut ok = true;
    let mut detail = Vec::new();
    for pe in &s.patches {
        let reference = row
            .and_then(|r| r.patches.iter().find(|p| p.label == pe.label))
            .map(|p| {
                p.probability_spec
                    .map(|c| c.value)
                    .unwrap_or(p.probability_ek.value)
            });
        let Some(p) = reference else {
            continue;
        };
        let tol = Z_MAX * stats::binomial_se(p, n) + 1e-12;
        ok &= (pe.freq - p).abs() <= tol;
        if pe.label != OTHER || pe.count > 0 {
            detail.push(format!("{} {:.4} vs {:.4}", pe.label, pe.freq, p));
        }
    }
    push(out, "mc_patch_frequencies", ok, detail.join(", "));
    if let Some(spec) = row.and_then(|r| r.lambda_spec) {
        let z = (s.lambda_hat - spec.value) / s.lambda_se;
        push(
            out,
            "mc_rate_agreement",
            z.abs() <= Z_MAX,
            format!(
                "lambda_mc = {:.5e} +- {:.2e}, lambda_spec = {:.5e}, z = {z:.3}",
                s.lambda_hat, s.lambda_se, spec.value
            ),
        );
    }
    if let (Some(shift), Some(fine)) = (mc.halving_shift_se, &mc.halved) {
        push(
            out,
            "mc_dt_halving",
            shift < HALVING_MAX_SE,
            format!(
                "lambda = {:.5e} at dt = {}, {:.5e} at dt = {}, shift {shift:.3} se",
                s.lambda_hat, s.dt, fine.lambda_hat, fine.dt
            ),
        );
    }
}
