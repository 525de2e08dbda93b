//! Energy landscapes `f: R^d -> R` with gradient and Hessian.
//!
//! Three families are supported:
//!
//! * [`Family::CosineLattice`]: `f(x, y) = -cos(pi x) - c cos(pi y)`, the
//!   two-dimensional lattice whose unit square around the origin is the
//!   basin of attraction of the minimum at `0`;
//! * [`Family::Polynomial`]: a sum of monomials in any dimension;
//! * [`Family::External`]: values tabulated on a regular 2D grid and
//!   interpolated with a tensor-product natural cubic spline (C^2), with
//!   derivatives by central differences.
//!
//! Any family may carry an additive linear tilt `t . x`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Relative finite-difference step for tabulated potentials.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: f64, powers: &[u32]) -> Self {
        Monomial {
            coeff,
            powers: powers.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    CosineLattice { c: f64 },
    Polynomial { dim: usize, terms: Vec<Monomial> },
    External(TabulatedGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    family: Family,
    tilt: Option<Vec<f64>>,
    fd_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub grad_err: f64,
    pub hess_err: f64,
}

impl PotentialSpec {
    pub fn cosine_lattice(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cosine lattice needs c > 0, got {c}"
            )));
        }
        Ok(Self::from_family(Family::CosineLattice { c }))
    }

    pub fn polynomial(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "polynomial dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        for t in &terms {
            if t.powers.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.powers.len(),
                });
            }
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient".into()));
            }
        }
        Ok(Self::from_family(Family::Polynomial { dim, terms }))
    }

    /// `sum_i x_i^2 / 2`-type helper: `f = a * |x|^2 / 2` in `dim` dimensions.
    pub fn isotropic_quadratic(dim: usize, a: f64) -> Result<Self> {
        let terms = (0..dim)
            .map(|i| {
                let mut p = vec![0; dim];
                p[i] = 2;
                Monomial::new(a / 2.0, &p)
            })
            .collect();
        Self::polynomial(dim, terms)
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::polynomial(dim, vec![Monomial::new(value, &vec![0; dim])])
    }

    pub fn external(grid: TabulatedGrid) -> Self {
        Self::from_family(Family::External(grid))
    }

    fn from_family(family: Family) -> Self {
        PotentialSpec {
            family,
            tilt: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Adds `t . x` to the potential.
    pub fn with_tilt(mut self, tilt: Vec<f64>) -> Result<Self> {
        if tilt.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: tilt.len(),
            });
        }
        self.tilt = Some(tilt);
        Ok(self)
    }

    /// Relative step (times the table extent) used for tabulated derivatives.
    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fd step must be > 0, got {step}"
            )));
        }
        self.fd_step = step;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tilt(&self) -> Option<&[f64]> {
        self.tilt.as_deref()
    }

    pub fn dimension(&self) -> usize {
        match &self.family {
            Family::CosineLattice { .. } => 2,
            Family::Polynomial { dim, .. } => *dim,
            Family::External(_) => 2,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("point {x:?}")));
        }
        Ok(())
    }

    /// Value only. Callers must pass a point of the right dimension.
    pub fn value(&self, x: &[f64]) -> f64 {
        let base = match &self.family {
            Family::CosineLattice { c } => -(PI * x[0]).cos() - c * (PI * x[1]).cos(),
            Family::Polynomial { terms, .. } => terms.iter().map(|t| monomial_value(t, x)).sum(),
            Family::External(grid) => grid.interpolate(x[0], x[1]),
        };
        base + self.tilt_value(x)
    }

    fn tilt_value(&self, x: &[f64]) -> f64 {
        match &self.tilt {
            Some(t) => t.iter().zip(x).map(|(a, b)| a * b).sum(),
            None => 0.0,
        }
    }

    /// Writes `grad f(x)` into `out` (length = dimension).
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.family {
            Family::CosineLattice { c } => {
                out[0] = PI * (PI * x[0]).sin();
                out[1] = c * PI * (PI * x[1]).sin();
            }
            Family::Polynomial { terms, .. } => {
                out.iter_mut().for_each(|g| *g = 0.0);
                for t in terms {
                    for (i, g) in out.iter_mut().enumerate() {
                        *g += monomial_partial(t, x, i);
                    }
                }
            }
            Family::External(grid) => {
                let s = self.fd_step * grid.scale();
                let mut y = [x[0], x[1]];
                for i in 0..2 {
                    y[i] = x[i] + s;
                    let fp = grid.interpolate(y[0], y[1]);
                    y[i] = x[i] - s;
                    let fm = grid.interpolate(y[0], y[1]);
                    y[i] = x[i];
                    out[i] = (fp - fm) / (2.0 * s);
                }
            }
        }
        if let Some(t) = &self.tilt {
            for (g, ti) in out.iter_mut().zip(t) {
                *g += ti;
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dimension()];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dimension();
        match &self.family {
            Family::CosineLattice { c } => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    PI * PI * (PI * x[0]).cos(),
                    c * PI * PI * (PI * x[1]).cos(),
                ]))
            }
            Family::Polynomial { terms, .. } => {
                let mut h = DMatrix::zeros(d, d);
                for t in terms {
                    for i in 0..d {
                        for j in i..d {
                            let v = monomial_second(t, x, i, j);
                            h[(i, j)] += v;
                            if i != j {
                                h[(j, i)] += v;
                            }
                        }
                    }
                }
                h
            }
            Family::External(grid) => {
                // Differences of the central-difference gradient; the larger
                // step keeps rounding below the truncation error.
                let s = 10.0 * self.fd_step * grid.scale();
                let mut h = DMatrix::zeros(2, 2);
                let mut y = x.to_vec();
                let mut gp = [0.0; 2];
                let mut gm = [0.0; 2];
                for j in 0..2 {
                    y[j] = x[j] + s;
                    self.gradient_into(&y, &mut gp);
                    y[j] = x[j] - s;
                    self.gradient_into(&y, &mut gm);
                    y[j] = x[j];
                    for i in 0..2 {
                        h[(i, j)] = (gp[i] - gm[i]) / (2.0 * s);
                    }
                }
                (&h + h.transpose()) * 0.5
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<EvalResult> {
        self.check_point(x)?;
        Ok(EvalResult {
            value: self.value(x),
            gradient: self.gradient(x),
            hessian: self.hessian(x),
        })
    }

    /// Max deviation of the gradient and Hessian from central differences at
    /// `x`, relative to `max(1, |exact|_inf)`.
    pub fn verify_derivatives(&self, x: &[f64], step: f64) -> Result<DerivativeReport> {
        self.check_point(x)?;
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be > 0, got {step}"
            )));
        }
        let d = self.dimension();
        let g = self.gradient(x);
        let h = self.hessian(x);
        let mut y = x.to_vec();
        let mut grad_dev: f64 = 0.0;
        let mut hess_dev: f64 = 0.0;
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        for j in 0..d {
            y[j] = x[j] + step;
            let fp = self.value(&y);
            self.gradient_into(&y, &mut gp);
            y[j] = x[j] - step;
            let fm = self.value(&y);
            self.gradient_into(&y, &mut gm);
            y[j] = x[j];
            grad_dev = grad_dev.max(((fp - fm) / (2.0 * step) - g[j]).abs());
            for i in 0..d {
                hess_dev = hess_dev.max(((gp[i] - gm[i]) / (2.0 * step) - h[(i, j)]).abs());
            }
        }
        let gscale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let hscale = h.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        Ok(DerivativeReport {
            grad_err: grad_dev / gscale,
            hess_err: hess_dev / hscale,
        })
    }
}

fn powi(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

fn monomial_value(t: &Monomial, x: &[f64]) -> f64 {
    t.powers
        .iter()
        .zip(x)
        .fold(t.coeff, |acc, (&p, &xi)| acc * powi(xi, p))
}

fn monomial_partial(t: &Monomial, x: &[f64], i: usize) -> f64 {
    let pi = t.powers[i];
    if pi == 0 {
        return 0.0;
    }
    let mut v = t.coeff * f64::from(pi);
    for (k, (&p, &xk)) in t.powers.iter().zip(x).enumerate() {
        v *= if k == i { powi(xk, p - 1) } else { powi(xk, p) };
    }
    v
}

fn monomial_second(t: &Monomial, x: &[f64], i: usize, j: usize) -> f64 {
    let mut p = t.powers.clone();
    let mut v = t.coeff;
    for axis in [i, j] {
        if p[axis] == 0 {
            return 0.0;
        }
        v *= f64::from(p[axis]);
        p[axis] -= 1;
    }
    p.iter().zip(x).fold(v, |acc, (&q, &xk)| acc * powi(xk, q))
}

/// Values on a regular 2D grid, `values[i * ny + j] = f(x0 + i*dx, y0 + j*dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedGrid {
    lower: [f64; 2],
    spacing: [f64; 2],
    shape: [usize; 2],
    values: Vec<f64>,
    // second derivatives along y of each row's natural spline
    row_m: Vec<f64>,
}

impl TabulatedGrid {
    pub fn new(
        lower: [f64; 2],
        spacing: [f64; 2],
        shape: [usize; 2],
        values: Vec<f64>,
    ) -> Result<Self> {
        let [nx, ny] = shape;
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter(format!(
                "tabulated grid needs at least 4x4 values, got {nx}x{ny}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                got: values.len(),
            });
        }
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) {
            return Err(Error::InvalidParameter(
                "grid spacing must be positive".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tabulated values".into()));
        }
        let mut row_m = vec![0.0; nx * ny];
        for i in 0..nx {
            let row = &values[i * ny..(i + 1) * ny];
            let m = natural_spline_second_derivatives(row, spacing[1]);
            row_m[i * ny..(i + 1) * ny].copy_from_slice(&m);
        }
        Ok(TabulatedGrid {
            lower,
            spacing,
            shape,
            values,
            row_m,
        })
    }

    /// Tabulates `f` over `[lower, upper]` with `shape` nodes per axis.
    pub fn sample(
        lower: [f64; 2],
        upper: [f64; 2],
        shape: [usize; 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let spacing = [
            (upper[0] - lower[0]) / (shape[0] - 1) as f64,
            (upper[1] - lower[1]) / (shape[1] - 1) as f64,
        ];
        let mut values = Vec::with_capacity(shape[0] * shape[1]);
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                values.push(f(
                    lower[0] + i as f64 * spacing[0],
                    lower[1] + j as f64 * spacing[1],
                ));
            }
        }
        Self::new(lower, spacing, shape, values)
    }

    fn scale(&self) -> f64 {
        let ex = self.spacing[0] * (self.shape[0] - 1) as f64;
        let ey = self.spacing[1] * (self.shape[1] - 1) as f64;
        ex.max(ey)
    }

    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let [nx, ny] = self.shape;
        let (jy, ty) = locate(y, self.lower[1], self.spacing[1], ny);
        let column: Vec<f64> = (0..nx)
            .map(|i| {
                let row = &self.values[i * ny..(i + 1) * ny];
                let m = &self.row_m[i * ny..(i + 1) * ny];
                spline_eval(row, m, self.spacing[1], jy, ty)
            })
            .collect();
        let mx = natural_spline_second_derivatives(&column, self.spacing[0]);
        let (ix, tx) = locate(x, self.lower[0], self.spacing[0], nx);
        spline_eval(&column, &mx, self.spacing[0], ix, tx)
    }
}

/// Cell index and local offset (in units of length); points outside the
/// table are extrapolated with the end cell's cubic.
fn locate(x: f64, lower: f64, h: f64, n: usize) -> (usize, f64) {
    let s = (x - lower) / h;
    let i = (s.floor().max(0.0) as usize).min(n - 2);
    (i, x - (lower + i as f64 * h))
}

fn spline_eval(y: &[f64], m: &[f64], h: f64, i: usize, t: f64) -> f64 {
    let a = (h - t) / h;
    let b = t / h;
    a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
}

fn natural_spline_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior system 4 m_i + m_{i-1} + m_{i+1} = rhs.
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for r in 0..k {
        let i = r + 1;
        let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        if r == 0 {
            c[r] = 1.0 / 4.0;
            d[r] = rhs / 4.0;
        } else {
            let denom = 4.0 - c[r - 1];
            c[r] = 1.0 / denom;
            d[r] = (rhs - d[r - 1]) / denom;
        }
    }
    for r in (0..k).rev() {
        let next = if r + 1 < k { m[r + 2] } else { 0.0 };
        m[r + 1] = d[r] - c[r] * next;
    }
    m
}
