//! Critical points of `f` on the closed box, the saddle table built from
//! them, generalized critical point counts and checks on the landscape.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

use crate::agmon::{self, AgmonField};
use crate::domain::{self, BoundaryPatch, DomainSpec, Face};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Tie tolerance on saddle values when counting the lowest level.
pub const LEVEL_TIE_TOL: f64 = 1e-10;

/// Relative floor on `min |eig|` below which a point is non-Morse.
pub const MORSE_FLOOR: f64 = 1e-6;

const NEWTON_REG: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryData {
    pub face: Face,
    pub normal: Vec<f64>,
    /// `n^T Hess f n`.
    pub mu: f64,
    pub normal_derivative: f64,
    pub restricted_index: usize,
    pub restricted_eigs: Vec<f64>,
    /// `|grad f|` is numerically zero (only the normal part can be non-zero
    /// at a boundary critical point).
    pub full_gradient_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    /// Norm of the gradient (interior) or of its tangential part (boundary).
    pub grad_norm: f64,
    pub hess_eigs: Vec<f64>,
    pub det_hess: f64,
    pub kind: PointKind,
    /// Morse index for interior points, generalized index for boundary
    /// points that are generalized critical points, restricted index otherwise.
    pub index: usize,
    pub boundary: Option<BoundaryData>,
}

impl CriticalPoint {
    /// Generalized index `q` when the point contributes to the counts.
    pub fn generalized_index(&self) -> Option<(usize, GeneralizedKind)> {
        match &self.boundary {
            None => Some((self.index, GeneralizedKind::Interior)),
            Some(b) => {
                if b.full_gradient_zero {
                    (b.mu < 0.0).then_some((b.restricted_index + 1, GeneralizedKind::Boundary2))
                } else {
                    (b.normal_derivative > 0.0)
                        .then_some((b.restricted_index + 1, GeneralizedKind::Boundary1))
                }
            }
        }
    }

    fn is_boundary_min(&self) -> bool {
        matches!(&self.boundary, Some(b) if b.restricted_index == 0)
    }

    fn is_saddle(&self) -> bool {
        matches!(&self.boundary, Some(b) if b.restricted_index == 0 && b.full_gradient_zero && b.mu < 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralizedKind {
    Interior,
    Boundary1,
    Boundary2,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CriticalPointSet {
    pub points: Vec<CriticalPoint>,
    /// Sign-change cells in which no root was found.
    pub warnings: Vec<String>,
}

impl CriticalPointSet {
    pub fn interior(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Interior)
    }

    pub fn boundary(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Boundary)
    }
}

/// Coordinates that Newton moves, with the rest pinned to a face.
#[derive(Debug, Clone)]
struct Chart {
    face: Option<Face>,
    free: Vec<usize>,
}

fn sorted_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

fn submatrix(h: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])])
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton(
    p: &PotentialSpec,
    dom: &DomainSpec,
    chart: &Chart,
    start: &[f64],
    tol: f64,
    trust: f64,
) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    if let Some(face) = chart.face {
        x[face.axis] = dom.face_coordinate(face);
    }
    let k = chart.free.len();
    let mut g = vec![0.0; x.len()];
    for _ in 0..NEWTON_MAX_ITER {
        p.gradient_into(&x, &mut g);
        let gt: Vec<f64> = chart.free.iter().map(|&a| g[a]).collect();
        if norm(&gt) <= tol {
            return Some(x);
        }
        let ht = submatrix(&p.hessian(&x), &chart.free);
        let rhs = -DVector::from_vec(gt);
        let scale = ht.amax().max(1.0);
        let step = match ht.clone().lu().solve(&rhs) {
            Some(s)
                if s.iter().all(|v| v.is_finite())
                    && ht.determinant().abs() > NEWTON_REG * scale.powi(k as i32) =>
            {
                s
            }
            _ => (ht + DMatrix::identity(k, k) * NEWTON_REG)
                .lu()
                .solve(&rhs)?,
        };
        let len = step.norm();
        let factor = if len > trust { trust / len } else { 1.0 };
        let mut moved = false;
        for (i, &a) in chart.free.iter().enumerate() {
            let target = (x[a] + factor * step[i]).clamp(dom.lower()[a], dom.upper()[a]);
            moved |= target != x[a];
            x[a] = target;
        }
        if !moved {
            return None;
        }
    }
    p.gradient_into(&x, &mut g);
    let gt: Vec<f64> = chart.free.iter().map(|&a| g[a]).collect();
    (norm(&gt) <= tol).then_some(x)
}

fn seed_axis(dom: &DomainSpec, a: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                dom.upper()[a]
            } else {
                dom.lower()[a] + dom.extent(a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// All points of the seed grid restricted to a chart.
fn chart_seeds(dom: &DomainSpec, chart: &Chart, axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = dom.dimension();
    let mut base = dom.lower().to_vec();
    if let Some(face) = chart.face {
        base[face.axis] = dom.face_coordinate(face);
    }
    let mut out = vec![base];
    for &a in &chart.free {
        let mut next = Vec::with_capacity(out.len() * axes[a].len());
        for x in &out {
            for &v in &axes[a] {
                let mut y = x.clone();
                y[a] = v;
                next.push(y);
            }
        }
        out = next;
    }
    debug_assert!(out.iter().all(|x| x.len() == d));
    out
}

fn classify(
    p: &PotentialSpec,
    dom: &DomainSpec,
    chart: &Chart,
    x: Vec<f64>,
    normal_tol: f64,
) -> Result<CriticalPoint> {
    let d = dom.dimension();
    let g = p.gradient(&x);
    let h = p.hessian(&x);
    let eigs = sorted_eigs(&h);
    let det = h.determinant();
    let scale = h.amax().max(1.0);
    let floor = MORSE_FLOOR * scale;
    let value = p.value(&x);
    match chart.face {
        None => {
            let min_abs = eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
            if min_abs <= floor {
                return Err(Error::Degenerate {
                    location: x,
                    min_abs_eig: min_abs,
                });
            }
            let index = eigs.iter().filter(|&&e| e < 0.0).count();
            Ok(CriticalPoint {
                grad_norm: norm(&g),
                location: x,
                value,
                hess_eigs: eigs,
                det_hess: det,
                kind: PointKind::Interior,
                index,
                boundary: None,
            })
        }
        Some(face) => {
            let restricted = sorted_eigs(&submatrix(&h, &chart.free));
            let min_abs = restricted.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
            if min_abs <= floor {
                return Err(Error::Degenerate {
                    location: x,
                    min_abs_eig: min_abs,
                });
            }
            let restricted_index = restricted.iter().filter(|&&e| e < 0.0).count();
            let normal_derivative = face.sign() * g[face.axis];
            let mu = h[(face.axis, face.axis)];
            let full_gradient_zero = normal_derivative.abs() <= normal_tol;
            if full_gradient_zero && mu.abs() <= floor {
                return Err(Error::Degenerate {
                    location: x,
                    min_abs_eig: mu.abs(),
                });
            }
            let mut normal = vec![0.0; d];
            normal[face.axis] = face.sign();
            let gt: Vec<f64> = chart.free.iter().map(|&a| g[a]).collect();
            let mut cp = CriticalPoint {
                grad_norm: norm(&gt),
                location: x,
                value,
                hess_eigs: eigs,
                det_hess: det,
                kind: PointKind::Boundary,
                index: restricted_index,
                boundary: Some(BoundaryData {
                    face,
                    normal,
                    mu,
                    normal_derivative,
                    restricted_index,
                    restricted_eigs: restricted,
                    full_gradient_zero,
                }),
            };
            if let Some((q, _)) = cp.generalized_index() {
                cp.index = q;
            }
            Ok(cp)
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Newton from a seed grid on the interior and on every closed face.
pub fn find_critical_points(
    p: &PotentialSpec,
    dom: &DomainSpec,
    seeds_per_axis: usize,
    tol: f64,
) -> Result<CriticalPointSet> {
    let d = dom.dimension();
    if p.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.dimension(),
        });
    }
    if seeds_per_axis < 4 {
        return Err(Error::InvalidParameter(format!(
            "seeds_per_axis must be >= 4, got {seeds_per_axis}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let axes: Vec<Vec<f64>> = (0..d).map(|a| seed_axis(dom, a, seeds_per_axis)).collect();
    let trust = (0..d)
        .map(|a| dom.extent(a) / (seeds_per_axis - 1) as f64)
        .fold(f64::INFINITY, f64::min);
    let mut charts = vec![Chart {
        face: None,
        free: (0..d).collect(),
    }];
    for face in dom.faces() {
        charts.push(Chart {
            face: Some(face),
            free: dom.tangential_axes(face),
        });
    }
    let dedupe = 10.0 * tol;
    let normal_tol = (100.0 * tol).max(1e-8);
    let margin = 1e-8 * dom.diameter();

    let mut found: Vec<(usize, Vec<f64>)> = charts
        .par_iter()
        .enumerate()
        .flat_map_iter(|(ci, chart)| {
            chart_seeds(dom, chart, &axes)
                .into_iter()
                .filter_map(|s| newton(p, dom, chart, &s, tol, trust))
                .filter(|x| chart.face.is_some() || dom.strictly_inside(x, margin))
                .map(move |x| (ci, x))
                .collect::<Vec<_>>()
        })
        .collect();
    found.sort_by(|a, b| lex_cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));

    let mut kept: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ci, x) in found {
        if kept.iter().any(|(_, y)| domain::distance(&x, y) <= dedupe) {
            continue;
        }
        kept.push((ci, x));
    }
    // a point found on two faces keeps the lower chart id
    kept.sort_by(|a, b| a.0.cmp(&b.0).then(lex_cmp(&a.1, &b.1)));
    let mut merged: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ci, x) in kept {
        if merged
            .iter()
            .any(|(_, y)| domain::distance(&x, y) <= dedupe)
        {
            continue;
        }
        merged.push((ci, x));
    }
    let mut points = Vec::with_capacity(merged.len());
    for (ci, x) in merged {
        points.push(classify(p, dom, &charts[ci], x, normal_tol)?);
    }
    points.sort_by(|a, b| lex_cmp(&a.location, &b.location));

    let warnings = sign_change_warnings(p, dom, &charts, &axes, &points);
    Ok(CriticalPointSet { points, warnings })
}

fn sign_change_warnings(
    p: &PotentialSpec,
    dom: &DomainSpec,
    charts: &[Chart],
    axes: &[Vec<f64>],
    points: &[CriticalPoint],
) -> Vec<String> {
    let n = axes[0].len();
    let mut out = Vec::new();
    for chart in charts {
        let k = chart.free.len();
        if k == 0 {
            continue;
        }
        let cells = (n - 1).pow(k as u32);
        for code in 0..cells {
            let mut c = code;
            let origin: Vec<usize> = (0..k)
                .map(|_| {
                    let v = c % (n - 1);
                    c /= n - 1;
                    v
                })
                .collect();
            let mut lo = vec![f64::INFINITY; k];
            let mut hi = vec![f64::NEG_INFINITY; k];
            let mut base = dom.lower().to_vec();
            if let Some(face) = chart.face {
                base[face.axis] = dom.face_coordinate(face);
            }
            for corner in 0..(1usize << k) {
                let mut x = base.clone();
                for (i, &a) in chart.free.iter().enumerate() {
                    x[a] = axes[a][origin[i] + ((corner >> i) & 1)];
                }
                let g = p.gradient(&x);
                for (i, &a) in chart.free.iter().enumerate() {
                    lo[i] = lo[i].min(g[a]);
                    hi[i] = hi[i].max(g[a]);
                }
            }
            if !(0..k).all(|i| lo[i] <= 0.0 && hi[i] >= 0.0) {
                continue;
            }
            let inside = points.iter().any(|cp| {
                chart.free.iter().enumerate().all(|(i, &a)| {
                    let (l, u) = (axes[a][origin[i]], axes[a][origin[i] + 1]);
                    cp.location[a] >= l - 1e-9 && cp.location[a] <= u + 1e-9
                }) && chart
                    .face
                    .is_none_or(|f| dom.on_face(f, &cp.location, 1e-9))
            });
            if !inside {
                let lower: Vec<f64> = chart
                    .free
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| axes[a][origin[i]])
                    .collect();
                let label = chart
                    .face
                    .map(|f| f.to_string())
                    .unwrap_or_else(|| "interior".into());
                out.push(format!(
                    "{label}: gradient sign change in cell at {lower:?} but no root found"
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saddle {
    pub label: String,
    pub location: Vec<f64>,
    pub value: f64,
    pub mu: f64,
    pub abs_mu: f64,
    pub abs_det_hess: f64,
    pub face: Face,
    pub sigma: String,
    pub gamma: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimumInfo {
    pub location: Vec<f64>,
    pub value: f64,
    pub det_hess: f64,
    pub hess_eigs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleTable {
    pub dimension: usize,
    pub minimum: MinimumInfo,
    pub saddles: Vec<Saddle>,
    pub n0: usize,
}

impl SaddleTable {
    pub fn saddle(&self, label: &str) -> Option<&Saddle> {
        self.saddles.iter().find(|s| s.label == label)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.saddles.iter().position(|s| s.label == label)
    }

    /// `f(z_1) - f(x_0)`.
    pub fn barrier(&self) -> f64 {
        self.saddles[0].value - self.minimum.value
    }

    /// `0.2 * min` pairwise saddle distance, or `0.2 *` the smallest box
    /// extent for a single saddle.
    pub fn default_patch_radius(&self, dom: &DomainSpec) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.saddles.iter().enumerate() {
            for b in &self.saddles[i + 1..] {
                best = best.min(domain::distance(&a.location, &b.location));
            }
        }
        if !best.is_finite() {
            best = (0..dom.dimension())
                .map(|a| dom.extent(a))
                .fold(f64::INFINITY, f64::min);
        }
        0.2 * best
    }

    /// Adds a patch of radius `rho` around every saddle without one.
    pub fn attach_patches(&self, dom: &mut DomainSpec, rho: f64) -> Result<()> {
        for s in &self.saddles {
            if dom.patches().iter().any(|p| p.label == s.label) {
                continue;
            }
            dom.add_patch(BoundaryPatch {
                label: s.label.clone(),
                face: s.face,
                center: s.location.clone(),
                radius: rho,
            })?;
        }
        Ok(())
    }
}

pub fn build_saddle_table(points: &[CriticalPoint], dom: &DomainSpec) -> Result<SaddleTable> {
    let interior: Vec<&CriticalPoint> = points
        .iter()
        .filter(|p| p.kind == PointKind::Interior)
        .collect();
    if interior.len() != 1 {
        return Err(Error::Assumption(format!(
            "expected exactly one interior critical point, found {}",
            interior.len()
        )));
    }
    let min = interior[0];
    if min.index != 0 {
        return Err(Error::Assumption(format!(
            "interior critical point at {:?} has index {}, expected a minimum",
            min.location, min.index
        )));
    }
    if let Some(bad) = points
        .iter()
        .find(|p| p.is_boundary_min() && !p.is_saddle())
    {
        let b = bad.boundary.as_ref().expect("boundary point");
        return Err(Error::Assumption(format!(
            "boundary local minimum at {:?} is not a saddle of f (mu = {:.6e}, normal derivative = {:.6e})",
            bad.location, b.mu, b.normal_derivative
        )));
    }
    let mut saddles: Vec<&CriticalPoint> = points.iter().filter(|p| p.is_saddle()).collect();
    if saddles.is_empty() {
        return Err(Error::NoSaddles);
    }
    saddles.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(lex_cmp(&a.location, &b.location))
    });
    // re-sort ties by location so the order does not depend on rounding
    let mut ordered: Vec<&CriticalPoint> = Vec::with_capacity(saddles.len());
    let mut i = 0;
    while i < saddles.len() {
        let mut j = i + 1;
        while j < saddles.len() && saddles[j].value - saddles[i].value <= LEVEL_TIE_TOL {
            j += 1;
        }
        let mut group = saddles[i..j].to_vec();
        group.sort_by(|a, b| lex_cmp(&a.location, &b.location));
        ordered.extend(group);
        i = j;
    }
    let v1 = ordered[0].value;
    let n0 = ordered
        .iter()
        .filter(|s| s.value - v1 <= LEVEL_TIE_TOL)
        .count();

    let mut used: Vec<String> = Vec::new();
    let mut table = Vec::with_capacity(ordered.len());
    for (k, s) in ordered.iter().enumerate() {
        let b = s.boundary.as_ref().expect("boundary point");
        let matched = dom
            .patches()
            .iter()
            .find(|p| p.face == b.face && domain::distance(&p.center, &s.location) <= 1e-6);
        let label = match matched {
            Some(p) => p.label.clone(),
            None => {
                let mut m = k + 1;
                let taken = |l: &str| {
                    used.iter().any(|u| u == l) || dom.patches().iter().any(|p| p.label == l)
                };
                while taken(&format!("z{m}")) {
                    m += 1;
                }
                format!("z{m}")
            }
        };
        used.push(label.clone());
        table.push(Saddle {
            sigma: label.clone(),
            gamma: label.clone(),
            label,
            location: s.location.clone(),
            value: s.value,
            mu: b.mu,
            abs_mu: b.mu.abs(),
            abs_det_hess: s.det_hess.abs(),
            face: b.face,
        });
    }
    Ok(SaddleTable {
        dimension: dom.dimension(),
        minimum: MinimumInfo {
            location: min.location.clone(),
            value: min.value,
            det_hess: min.det_hess,
            hess_eigs: min.hess_eigs.clone(),
        },
        saddles: table,
        n0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralizedCounts {
    pub m_interior: Vec<usize>,
    pub m_boundary1: Vec<usize>,
    pub m_boundary2: Vec<usize>,
    pub m_total: Vec<usize>,
}

pub fn count_generalized(points: &[CriticalPoint], dim: usize) -> GeneralizedCounts {
    let mut c = GeneralizedCounts {
        m_interior: vec![0; dim + 1],
        m_boundary1: vec![0; dim + 1],
        m_boundary2: vec![0; dim + 1],
        m_total: vec![0; dim + 1],
    };
    for p in points {
        let Some((q, kind)) = p.generalized_index() else {
            continue;
        };
        if q > dim {
            continue;
        }
        match kind {
            GeneralizedKind::Interior => c.m_interior[q] += 1,
            GeneralizedKind::Boundary1 => c.m_boundary1[q] += 1,
            GeneralizedKind::Boundary2 => c.m_boundary2[q] += 1,
        }
    }
    for q in 0..=dim {
        c.m_total[q] = c.m_interior[q] + c.m_boundary1[q] + c.m_boundary2[q];
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NegativeNormalDerivative,
    BoundaryMinimumNotSaddle,
    InteriorCriticalPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub a_ok: bool,
    pub min_normal_derivative: f64,
    pub samples: usize,
    pub violations: Vec<Violation>,
}

/// Tolerance for `d_n f >= -tol` on sampled boundary points.
pub const NORMAL_DERIVATIVE_TOL: f64 = 1e-9;

pub fn check_assumptions(
    p: &PotentialSpec,
    dom: &DomainSpec,
    points: &[CriticalPoint],
    n_boundary_samples: usize,
) -> AssumptionReport {
    let d = dom.dimension();
    let mut violations = Vec::new();
    let mut min_dn = f64::INFINITY;
    let mut samples = 0;
    let n = n_boundary_samples.max(2);
    for face in dom.faces() {
        let tang = dom.tangential_axes(face);
        let per_axis = if tang.is_empty() {
            1
        } else {
            ((n as f64).powf(1.0 / tang.len() as f64).ceil() as usize).max(2)
        };
        let axes: Vec<Vec<f64>> = (0..d).map(|a| seed_axis(dom, a, per_axis.max(2))).collect();
        let chart = Chart {
            face: Some(face),
            free: tang,
        };
        let mut worst: Option<(f64, Vec<f64>)> = None;
        for x in chart_seeds(dom, &chart, &axes) {
            let dn = face.sign() * p.gradient(&x)[face.axis];
            samples += 1;
            min_dn = min_dn.min(dn);
            if dn < -NORMAL_DERIVATIVE_TOL && worst.as_ref().is_none_or(|(w, _)| dn < *w) {
                worst = Some((dn, x));
            }
        }
        if let Some((dn, x)) = worst {
            violations.push(Violation {
                kind: ViolationKind::NegativeNormalDerivative,
                location: Some(x),
                value: dn,
            });
        }
    }
    for cp in points
        .iter()
        .filter(|c| c.is_boundary_min() && !c.is_saddle())
    {
        violations.push(Violation {
            kind: ViolationKind::BoundaryMinimumNotSaddle,
            location: Some(cp.location.clone()),
            value: cp.boundary.as_ref().map(|b| b.mu).unwrap_or(f64::NAN),
        });
    }
    let interior: Vec<&CriticalPoint> = points
        .iter()
        .filter(|c| c.kind == PointKind::Interior)
        .collect();
    if interior.len() != 1 || interior[0].index != 0 {
        violations.push(Violation {
            kind: ViolationKind::InteriorCriticalPoints,
            location: interior.first().map(|c| c.location.clone()),
            value: interior.len() as f64,
        });
    }
    AssumptionReport {
        a_ok: violations.is_empty(),
        min_normal_derivative: min_dn,
        samples,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypo1Entry {
    pub label: String,
    pub inf_distance: f64,
    pub threshold: f64,
    pub margin: f64,
    pub eps_grid: f64,
    pub ok: bool,
    /// Holds even after subtracting the grid error bound.
    pub robust: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypo2BisEntry {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub hypo1: Vec<Hypo1Entry>,
    pub hypo1_ok: bool,
    pub hypo2_lhs: f64,
    pub hypo2_rhs: f64,
    pub hypo2_margin: f64,
    pub hypo2_ok: bool,
    pub hypo2_bis: Vec<Hypo2BisEntry>,
}

/// One Agmon field per saddle, keyed by label.
pub fn saddle_agmon_fields(
    p: &PotentialSpec,
    dom: &DomainSpec,
    table: &SaddleTable,
    delta: f64,
) -> Result<HashMap<String, AgmonField>> {
    table
        .saddles
        .par_iter()
        .map(|s| {
            Ok((
                s.label.clone(),
                agmon::agmon_field(p, dom, &s.location, delta)?,
            ))
        })
        .collect()
}

pub fn check_hypotheses(
    table: &SaddleTable,
    dom: &DomainSpec,
    fields: &HashMap<String, AgmonField>,
) -> Result<HypothesisReport> {
    let f1 = table.saddles[0].value;
    let fnn = table.saddles.last().expect("non-empty").value;
    let f0 = table.minimum.value;
    let mut hypo1 = Vec::with_capacity(table.saddles.len());
    for s in &table.saddles {
        let field = fields
            .get(&s.label)
            .ok_or_else(|| Error::MissingAgmonField(s.label.clone()))?;
        let inf = agmon::boundary_inf(field, dom, &s.gamma)?;
        let threshold = (fnn - s.value).max(s.value - f1);
        let margin = inf - threshold;
        hypo1.push(Hypo1Entry {
            label: s.label.clone(),
            inf_distance: inf,
            threshold,
            margin,
            eps_grid: field.eps_grid,
            ok: margin > 0.0,
            robust: margin > field.eps_grid,
        });
    }
    let hypo2_lhs = f1 - f0;
    let hypo2_rhs = fnn - f1;
    let hypo2_bis = table.saddles[table.n0..]
        .iter()
        .map(|s| {
            let lhs = 2.0 * (s.value - f1);
            Hypo2BisEntry {
                label: s.label.clone(),
                lhs,
                rhs: hypo2_lhs,
                ok: lhs < hypo2_lhs,
            }
        })
        .collect();
    Ok(HypothesisReport {
        hypo1_ok: hypo1.iter().all(|e| e.ok),
        hypo1,
        hypo2_lhs,
        hypo2_rhs,
        hypo2_margin: hypo2_lhs - hypo2_rhs,
        hypo2_ok: hypo2_lhs > hypo2_rhs,
        hypo2_bis,
    })
}
