use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, Face};
use crate::error::{Error, Result};
use crate::grid::BoxGrid;
use crate::potential::PotentialSpec;

/// Fewest nodes allowed along any axis.
pub const MIN_NODES: usize = 8;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Every boundary node is absorbing.
    DirichletAll,
    /// Nodes on the listed faces are absorbing; the other faces reflect.
    Mixed { dirichlet: Vec<Face> },
}

/// Killed jump chain of the generator on a regular grid, with nearest
/// neighbour rates `q(i -> j) = a exp(-(f_j - f_i) / h)`, `a = h / (2 delta^2)`.
///
/// The eigenproblem is solved for the symmetrized matrix
/// `S = D^{1/2} (-Q) D^{-1/2}`, `D = diag(pi)`. Its off-diagonal entries are
/// all `-a`, so it is stored implicitly.
#[derive(Debug, Clone)]
pub struct DiscreteGenerator {
    pub grid: BoxGrid,
    pub h: f64,
    pub delta: f64,
    pub bc: BoundaryCondition,
    a: f64,
    f: Vec<f64>,
    fmin: f64,
    unknown_of: Vec<u32>,
    nodes: Vec<usize>,
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    exits: Vec<(u32, usize)>,
    killed_nbrs: Vec<u32>,
    w: Vec<f64>,
    sqrt_pi: Vec<f64>,
}

pub fn assemble(
    p: &PotentialSpec,
    dom: &DomainSpec,
    h: f64,
    delta: f64,
    bc: BoundaryCondition,
) -> Result<DiscreteGenerator> {
    let d = dom.dimension();
    if p.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.dimension(),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature h must be > 0, got {h}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing must be > 0, got {delta}"
        )));
    }
    for a in 0..d {
        let n = dom.extent(a) / delta;
        if (n - n.round()).abs() > 1e-8 * n.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing {delta} does not divide the box edge {} along axis {a}",
                dom.extent(a)
            )));
        }
        if (n.round() as usize) + 1 < MIN_NODES {
            return Err(Error::GridTooSmall(n.round() as usize + 1));
        }
    }
    if let BoundaryCondition::Mixed { dirichlet } = &bc {
        if dirichlet.iter().any(|f| f.axis >= d) {
            return Err(Error::InvalidParameter(
                "Dirichlet face names a missing axis".into(),
            ));
        }
    }
    let grid = BoxGrid::covering(dom, delta);
    let n = grid.len();
    let f: Vec<f64> = (0..n).map(|i| p.value(&grid.point(i))).collect();
    if let Some(bad) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "potential at {:?}",
            grid.point(bad)
        )));
    }
    let fmin = f.iter().cloned().fold(f64::INFINITY, f64::min);

    let killed = |node: usize| -> bool {
        let idx = grid.multi_index(node);
        match &bc {
            BoundaryCondition::DirichletAll => idx
                .iter()
                .zip(&grid.counts)
                .any(|(&i, &c)| i == 0 || i + 1 == c),
            BoundaryCondition::Mixed { dirichlet } => dirichlet.iter().any(|face| {
                let i = idx[face.axis];
                if face.upper {
                    i + 1 == grid.counts[face.axis]
                } else {
                    i == 0
                }
            }),
        }
    };
    let mut unknown_of = vec![NONE; n];
    let mut nodes = Vec::new();
    for node in 0..n {
        if !killed(node) {
            unknown_of[node] = nodes.len() as u32;
            nodes.push(node);
        }
    }
    if nodes.is_empty() {
        return Err(Error::GridTooSmall(0));
    }
    let strides: Vec<usize> = (0..d)
        .map(|a| grid.counts[a + 1..].iter().product())
        .collect();
    let a = h / (2.0 * delta * delta);
    let mut offsets = Vec::with_capacity(nodes.len() + 1);
    let mut nbrs = Vec::with_capacity(nodes.len() * 2 * d);
    let mut exits = Vec::new();
    let mut killed_nbrs = Vec::with_capacity(nodes.len());
    let mut w = Vec::with_capacity(nodes.len());
    let mut sqrt_pi = Vec::with_capacity(nodes.len());
    offsets.push(0);
    for (u, &node) in nodes.iter().enumerate() {
        let idx = grid.multi_index(node);
        let mut wi = 0.0;
        let mut k = 0u32;
        for axis in 0..d {
            for up in [false, true] {
                let j = if up {
                    if idx[axis] + 1 == grid.counts[axis] {
                        continue;
                    }
                    node + strides[axis]
                } else {
                    if idx[axis] == 0 {
                        continue;
                    }
                    node - strides[axis]
                };
                wi += (-(f[j] - f[node]) / h).exp_m1();
                if unknown_of[j] == NONE {
                    exits.push((u as u32, j));
                    k += 1;
                } else {
                    nbrs.push(unknown_of[j]);
                }
            }
        }
        offsets.push(nbrs.len());
        killed_nbrs.push(k);
        w.push(wi);
        sqrt_pi.push((-(f[node] - fmin) / h).exp());
    }
    Ok(DiscreteGenerator {
        grid,
        h,
        delta,
        bc,
        a,
        f,
        fmin,
        unknown_of,
        nodes,
        offsets,
        nbrs,
        exits,
        killed_nbrs,
        w,
        sqrt_pi,
    })
}

impl DiscreteGenerator {
    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn n_unknowns(&self) -> usize {
        self.nodes.len()
    }

    /// Grid node of unknown `u`.
    pub fn node(&self, u: usize) -> usize {
        self.nodes[u]
    }

    pub fn unknown(&self, node: usize) -> Option<usize> {
        let u = self.unknown_of[node];
        (u != NONE).then_some(u as usize)
    }

    pub fn is_killed(&self, node: usize) -> bool {
        self.unknown_of[node] == NONE
    }

    pub fn rate_scale(&self) -> f64 {
        self.a
    }

    pub fn f_min(&self) -> f64 {
        self.fmin
    }

    pub fn potential(&self, node: usize) -> f64 {
        self.f[node]
    }

    /// `q(i -> j)` between grid nodes.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.a * (-(self.f[j] - self.f[i]) / self.h).exp()
    }

    /// `pi_i = exp(-2 (f_i - f_min) / h)`.
    pub fn weight(&self, node: usize) -> f64 {
        (-2.0 * (self.f[node] - self.fmin) / self.h).exp()
    }

    /// `pi_i q(i -> j)` in a form symmetric in `(i, j)`.
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.a * (-((self.f[i] - self.fmin) + (self.f[j] - self.fmin)) / self.h).exp()
    }

    /// `sqrt(pi)` per unknown.
    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_pi
    }

    pub(crate) fn neighbors(&self, u: usize) -> &[u32] {
        &self.nbrs[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Edges from an unknown to a killed node, as `(unknown, node)`.
    pub fn exit_edges(&self) -> &[(u32, usize)] {
        &self.exits
    }

    /// Diagonal of `S`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|u| {
                self.a * ((self.neighbors(u).len() as u32 + self.killed_nbrs[u]) as f64 + self.w[u])
            })
            .collect()
    }

    /// `y = S x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for u in 0..self.nodes.len() {
            let xi = x[u];
            let mut s = 0.0;
            for &v in self.neighbors(u) {
                s += xi - x[v as usize];
            }
            y[u] = self.a * (s + (self.killed_nbrs[u] as f64 + self.w[u]) * xi);
        }
    }

    /// Off-diagonal entry `S[u][v]` for adjacent unknowns, from the
    /// definition `sqrt(pi_u) q(u -> v) / sqrt(pi_v)`.
    pub fn symmetrized_entry(&self, u: usize, v: usize) -> f64 {
        let (i, j) = (self.nodes[u], self.nodes[v]);
        -self.sqrt_pi[u] * self.rate(i, j) / self.sqrt_pi[v]
    }

    /// `sum over edges pi_i q_ij (u_i - u_j)^2 + sum over exits pi_i q_ib u_i^2`
    /// with `u = phi / sqrt(pi)`. Positive by construction.
    pub fn dirichlet_form(&self, phi: &[f64]) -> f64 {
        let h = self.h;
        let mut e = 0.0;
        for u in 0..self.nodes.len() {
            let fi = self.f[self.nodes[u]];
            for &v in self.neighbors(u) {
                let v = v as usize;
                if v <= u {
                    continue;
                }
                let t = (-(self.f[self.nodes[v]] - fi) / (2.0 * h)).exp();
                let diff = phi[u] * t - phi[v] / t;
                e += diff * diff;
            }
        }
        for &(u, b) in &self.exits {
            let u = u as usize;
            e += phi[u] * phi[u] * (-(self.f[b] - self.f[self.nodes[u]]) / h).exp();
        }
        self.a * e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Monomial;

    fn lattice(delta: f64) -> DiscreteGenerator {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        assemble(&p, &d, 0.4, delta, BoundaryCondition::DirichletAll).unwrap()
    }

    #[test]
    fn detailed_balance_is_exact() {
        let g = lattice(0.1);
        for u in 0..g.n_unknowns() {
            let i = g.node(u);
            for &v in g.neighbors(u) {
                let j = g.node(v as usize);
                assert_eq!(g.flow(i, j), g.flow(j, i));
                let lhs = g.weight(i) * g.rate(i, j);
                assert!((lhs / g.flow(i, j) - 1.0).abs() < 1e-13);
                assert!(g.rate(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn symmetrized_off_diagonal_is_constant() {
        let g = lattice(0.1);
        for u in 0..g.n_unknowns() {
            for &v in g.neighbors(u) {
                let e = g.symmetrized_entry(u, v as usize);
                assert!((e + g.rate_scale()).abs() < 1e-12 * g.rate_scale());
                assert!((e - g.symmetrized_entry(v as usize, u)).abs() < 1e-12 * g.rate_scale());
            }
        }
    }

    #[test]
    fn diagonal_matches_row_sums() {
        let g = lattice(0.1);
        let diag = g.diagonal();
        for u in 0..g.n_unknowns() {
            let i = g.node(u);
            let idx = g.grid.multi_index(i);
            let mut s = 0.0;
            for axis in 0..2 {
                for dir in [-1i64, 1] {
                    let mut jdx = idx.clone();
                    let k = idx[axis] as i64 + dir;
                    if k < 0 || k as usize >= g.grid.counts[axis] {
                        continue;
                    }
                    jdx[axis] = k as usize;
                    s += g.rate(i, g.grid.node(&jdx));
                }
            }
            assert!((diag[u] - s).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn dirichlet_form_matches_quadratic_form() {
        let g = lattice(0.1);
        let phi: Vec<f64> = (0..g.n_unknowns())
            .map(|u| 1.0 + (u as f64 * 0.37).sin())
            .collect();
        let mut y = vec![0.0; phi.len()];
        g.apply(&phi, &mut y);
        let q: f64 = phi.iter().zip(&y).map(|(a, b)| a * b).sum();
        let e = g.dirichlet_form(&phi);
        assert!((q - e).abs() < 1e-10 * e, "{q} {e}");
    }

    #[test]
    fn grid_requirements() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        assert!(matches!(
            assemble(&p, &d, 0.4, 0.5, BoundaryCondition::DirichletAll),
            Err(Error::GridTooSmall(5))
        ));
        assert!(assemble(&p, &d, 0.4, 0.03, BoundaryCondition::DirichletAll).is_err());
        assert!(assemble(&p, &d, 0.0, 0.1, BoundaryCondition::DirichletAll).is_err());
    }

    #[test]
    fn mixed_boundary_kills_only_dirichlet_face() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::new(vec![-0.6, -0.6], vec![1.0, 0.6]).unwrap();
        let g = assemble(
            &p,
            &d,
            0.3,
            0.1,
            BoundaryCondition::Mixed {
                dirichlet: vec!["+x".parse().unwrap()],
            },
        )
        .unwrap();
        // 17 x 13 nodes, one column of 13 killed
        assert_eq!(g.n_unknowns(), 16 * 13);
        assert_eq!(g.exit_edges().len(), 13);
    }

    #[test]
    fn generator_matches_operator_on_smooth_function() {
        // 1D f = x^2/2: (-Q)g should approximate -(h/2) g'' + f' g' to O(delta^2)
        let p = PotentialSpec::polynomial(1, vec![Monomial::new(0.5, &[2])]).unwrap();
        let d = DomainSpec::new(vec![-1.0], vec![1.0]).unwrap();
        let h = 0.5;
        let mut errs = Vec::new();
        for delta in [0.02, 0.01] {
            let g = assemble(&p, &d, h, delta, BoundaryCondition::DirichletAll).unwrap();
            let test = |x: f64| (2.0 * x).sin() + x * x;
            let exact = |x: f64| {
                -(h / 2.0) * (-4.0 * (2.0 * x).sin() + 2.0) + x * (2.0 * (2.0 * x).cos() + 2.0 * x)
            };
            let mut err: f64 = 0.0;
            for u in 0..g.n_unknowns() {
                let i = g.node(u);
                let x = g.grid.point(i)[0];
                let mut s = 0.0;
                for j in [i - 1, i + 1] {
                    s += g.rate(i, j) * (test(x) - test(g.grid.point(j)[0]));
                }
                err = err.max((s - exact(x)).abs());
            }
            errs.push(err);
        }
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
        assert!(errs[1] < 1e-3);
    }
}
