//! Agmon distance `d_a(x, y) = inf over curves of int |grad f| |dgamma|`
//! approximated by shortest paths on a grid graph over the closed box.
//!
//! Nodes are connected to all `3^d - 1` neighbours (8 in 2D, 26 in 3D)
//! with edge weight `(|grad f(x)| + |grad f(y)|) / 2 * |x - y|`.

use rand::Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
pub use crate::grid::BoxGrid;
use crate::potential::PotentialSpec;
use crate::rng::{self, Substream};

#[derive(Debug, Clone, PartialEq)]
pub struct AgmonField {
    pub grid: BoxGrid,
    pub source: Vec<f64>,
    pub source_node: usize,
    pub distance: Vec<f64>,
    pub settled: Vec<bool>,
    /// Conservative discretization bound on the distance values.
    pub eps_grid: f64,
    values: Vec<f64>,
}

impl AgmonField {
    pub fn at(&self, node: usize) -> f64 {
        self.distance[node]
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.distance[self.grid.nearest(x)]
    }

    /// Potential value at a node (as used for the lower-bound check).
    pub fn potential_at(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// `d_a(node, source) - |f(node) - f(source)|`.
    pub fn lower_bound_margin(&self, node: usize) -> f64 {
        self.distance[node] - (self.values[node] - self.values[self.source_node]).abs()
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, ties by node index
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn neighbor_offsets(d: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let off: Vec<isize> = (0..d)
            .map(|_| {
                let v = (c % 3) as isize - 1;
                c /= 3;
                v
            })
            .collect();
        if off.iter().any(|&v| v != 0) {
            out.push(off);
        }
    }
    out
}

pub fn agmon_field(
    p: &PotentialSpec,
    dom: &DomainSpec,
    source: &[f64],
    delta: f64,
) -> Result<AgmonField> {
    let d = dom.dimension();
    if p.dimension() != d || source.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: source.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing must be > 0, got {delta}"
        )));
    }
    if (0..d).any(|a| delta > dom.extent(a) / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {delta} exceeds half the box extent"
        )));
    }
    if !dom.contains(source) {
        return Err(Error::InvalidParameter(format!(
            "source {source:?} outside the box"
        )));
    }
    let grid = BoxGrid::covering(dom, delta);
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    let mut g = vec![0.0; d];
    for node in 0..n {
        let x = grid.point(node);
        values.push(p.value(&x));
        p.gradient_into(&x, &mut g);
        speed.push(g.iter().map(|v| v * v).sum::<f64>().sqrt());
    }

    let offsets = neighbor_offsets(d);
    let strides: Vec<isize> = (0..d)
        .map(|a| grid.counts[a + 1..].iter().product::<usize>() as isize)
        .collect();
    let lengths: Vec<f64> = offsets
        .iter()
        .map(|o| {
            o.iter()
                .zip(&grid.spacing)
                .map(|(&k, s)| (k as f64 * s).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let steps: Vec<isize> = offsets
        .iter()
        .map(|o| o.iter().zip(&strides).map(|(k, s)| k * s).sum())
        .collect();

    let source_node = grid.nearest(source);
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source_node] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: source_node,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        let idx = grid.multi_index(node);
        for ((off, &len), &step) in offsets.iter().zip(&lengths).zip(&steps) {
            let inside = idx.iter().zip(off).zip(&grid.counts).all(|((&i, &o), &c)| {
                let j = i as isize + o;
                j >= 0 && (j as usize) < c
            });
            if !inside {
                continue;
            }
            let next = (node as isize + step) as usize;
            if settled[next] {
                continue;
            }
            let w = 0.5 * (speed[node] + speed[next]) * len;
            let c = cost + w;
            if c < dist[next] {
                dist[next] = c;
                heap.push(HeapEntry {
                    cost: c,
                    node: next,
                });
            }
        }
    }

    let eps_grid = discretization_bound(p, &grid, &speed, dom.diameter());
    Ok(AgmonField {
        grid,
        source: source.to_vec(),
        source_node,
        distance: dist,
        settled,
        eps_grid,
        values,
    })
}

/// `max|grad f| * delta * (sqrt2 - 1)` for stencil anisotropy plus a
/// trapezoid term `max|D^3 f| * delta^2 * diam / 6`, with the third
/// derivative estimated from Hessian differences on a coarse subgrid.
fn discretization_bound(p: &PotentialSpec, grid: &BoxGrid, speed: &[f64], diam: f64) -> f64 {
    let delta = grid.spacing.iter().cloned().fold(0.0, f64::max);
    let gmax = speed.iter().cloned().fold(0.0, f64::max);
    let d = grid.dimension();
    let m = 24usize;
    let coarse: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let lo = grid.lower[a];
            let hi = grid.coordinate(a, grid.counts[a] - 1);
            (0..m)
                .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
                .collect()
        })
        .collect();
    let mut third: f64 = 0.0;
    let total = m.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let x: Vec<f64> = (0..d)
            .map(|a| {
                let v = coarse[a][c % m];
                c /= m;
                v
            })
            .collect();
        let hx = p.hessian(&x);
        for a in 0..d {
            let mut y = x.clone();
            let step = (coarse[a][1] - coarse[a][0]) * 0.25;
            y[a] += step;
            let hy = p.hessian(&y);
            third = third.max((&hy - &hx).amax() / step);
        }
    }
    gmax * delta * (std::f64::consts::SQRT_2 - 1.0) + third * delta * delta * diam / 6.0
}

/// Minimum of the field over boundary nodes outside `Gamma` of `excluded`.
pub fn boundary_inf(field: &AgmonField, dom: &DomainSpec, excluded: &str) -> Result<f64> {
    if dom.gamma(excluded).is_none() {
        return Err(Error::Config(format!("unknown gamma patch `{excluded}`")));
    }
    let mut best = f64::INFINITY;
    let mut any = false;
    for node in 0..field.grid.len() {
        if !field.grid.is_boundary(node) {
            continue;
        }
        let x = field.grid.point(node);
        if dom.in_gamma(excluded, &x, 1e-9) {
            continue;
        }
        any = true;
        best = best.min(field.distance[node]);
    }
    if !any {
        return Err(Error::EmptyComplement(excluded.to_string()));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AgmonPropertyReport {
    pub n_pairs: usize,
    pub eps_grid: f64,
    /// min over sampled nodes of `d_a - |f(x) - f(source)|`, for both fields.
    pub worst_lower_bound_margin: f64,
    /// min of `d(a,b) + d(b,c) - d(a,c)` over sampled triangles.
    pub worst_triangle_margin: f64,
    /// `|d(a,b) - d(b,a)|` between the two fields.
    pub symmetry_gap: f64,
    pub second_source: Vec<f64>,
    pub passed: bool,
}

/// Samples `n_pairs` nodes, builds a second field from a random node and
/// checks the lower bound, triangle inequality and symmetry.
pub fn check_agmon_properties(
    p: &PotentialSpec,
    dom: &DomainSpec,
    field: &AgmonField,
    n_pairs: usize,
    seed: u64,
) -> Result<AgmonPropertyReport> {
    let mut rng = rng::stream(seed, 0, Substream::Sampling);
    let n = field.grid.len();
    let b_node = rng.random_range(0..n);
    let b = field.grid.point(b_node);
    let delta = field.grid.spacing.iter().cloned().fold(0.0, f64::max);
    let other = agmon_field(p, dom, &b, delta)?;
    let a_node = field.source_node;
    let d_ab = field.distance[b_node];
    let d_ba = other.distance[a_node];
    let mut worst_lb = f64::INFINITY;
    let mut worst_tri = f64::INFINITY;
    for _ in 0..n_pairs {
        let x = rng.random_range(0..n);
        worst_lb = worst_lb
            .min(field.lower_bound_margin(x))
            .min(other.lower_bound_margin(x));
        let d_ax = field.distance[x];
        let d_bx = other.distance[x];
        worst_tri = worst_tri.min(d_ab + d_bx - d_ax).min(d_ba + d_ax - d_bx);
    }
    let eps = field.eps_grid.max(other.eps_grid);
    let symmetry_gap = (d_ab - d_ba).abs();
    Ok(AgmonPropertyReport {
        n_pairs,
        eps_grid: eps,
        worst_lower_bound_margin: worst_lb,
        worst_triangle_margin: worst_tri,
        symmetry_gap,
        second_source: b,
        passed: worst_lb >= -eps && worst_tri >= -1e-12 * (1.0 + d_ab) && symmetry_gap <= 2.0 * eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryPatch;

    fn lattice() -> (PotentialSpec, DomainSpec) {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let mut d = DomainSpec::square(1.0).unwrap();
        d.add_patch(BoundaryPatch {
            label: "z1".into(),
            face: "+x".parse().unwrap(),
            center: vec![1.0, 0.0],
            radius: 1.0,
        })
        .unwrap();
        (p, d)
    }

    #[test]
    fn neighbor_counts() {
        assert_eq!(neighbor_offsets(1).len(), 2);
        assert_eq!(neighbor_offsets(2).len(), 8);
        assert_eq!(neighbor_offsets(3).len(), 26);
    }

    #[test]
    fn distance_from_minimum_to_saddle_is_barrier() {
        // any path costs at least |f(1,0) - f(0,0)| = 2 and the axis path
        // achieves int_0^1 pi sin(pi x) dx = 2
        let (p, d) = lattice();
        let field = agmon_field(&p, &d, &[0.0, 0.0], 0.02).unwrap();
        assert_eq!(field.at(field.source_node), 0.0);
        let v = field.value_at(&[1.0, 0.0]);
        assert!((v - 2.0).abs() < 0.02 * 2.0, "{v}");
        assert!(field.settled.iter().all(|&s| s));
    }

    #[test]
    fn constant_potential_has_zero_distance() {
        let p = PotentialSpec::constant(2, 3.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        let field = agmon_field(&p, &d, &[0.2, 0.1], 0.1).unwrap();
        assert!(field.distance.iter().all(|&v| v == 0.0));
        assert_eq!(field.eps_grid, 0.0);
    }

    #[test]
    fn rejects_coarse_grid() {
        let (p, d) = lattice();
        assert!(agmon_field(&p, &d, &[0.0, 0.0], 1.5).is_err());
        assert!(agmon_field(&p, &d, &[3.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn boundary_infimum_from_saddle() {
        let (p, d) = lattice();
        let field = agmon_field(&p, &d, &[1.0, 0.0], 0.02).unwrap();
        let inf = boundary_inf(&field, &d, "z1").unwrap();
        // closest excluded points are the corners at f = 2
        assert!(inf >= 2.0 - field.eps_grid, "{inf}");
        assert!(inf.is_finite());
    }

    #[test]
    fn excluding_everything_is_an_error() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::new(vec![-1.0], vec![1.0]);
        // 1D: the only boundary points are the two faces
        let p1 = PotentialSpec::isotropic_quadratic(1, 1.0).unwrap();
        let mut d1 = d.unwrap();
        d1.add_patch(BoundaryPatch {
            label: "r".into(),
            face: "+x".parse().unwrap(),
            center: vec![1.0],
            radius: 0.5,
        })
        .unwrap();
        let field = agmon_field(&p1, &d1, &[0.0], 0.1).unwrap();
        assert!(boundary_inf(&field, &d1, "r").is_ok());
        let _ = p;
    }

    #[test]
    fn property_suite_small_grid() {
        let (p, d) = lattice();
        let field = agmon_field(&p, &d, &[0.0, 0.0], 0.04).unwrap();
        let r = check_agmon_properties(&p, &d, &field, 200, 5).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(field.lower_bound_margin(field.source_node), 0.0);
    }
}
