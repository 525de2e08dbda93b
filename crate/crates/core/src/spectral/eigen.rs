use rand::Rng;
use serde::Serialize;

use super::generator::DiscreteGenerator;
use crate::error::{Error, Result};
use crate::rng::{self, Substream};

/// Relative tolerance of the inner conjugate gradient solves.
pub const CG_TOL: f64 = 1e-12;

/// Largest accepted norm of the last correction to the unit eigenvector.
pub const VECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSolution {
    pub h: f64,
    pub delta: f64,
    /// Principal eigenvalue of `-Q`.
    pub lambda: f64,
    /// `u_h` per unknown, normalized so `sum u^2 pi delta^d = 1` with
    /// `pi` taken relative to `f_min`.
    pub u: Vec<f64>,
    /// Same eigenvector in symmetrized variables, unit Euclidean norm.
    #[serde(skip)]
    pub phi: Vec<f64>,
    /// `|S phi - lambda phi| / (lambda |phi|)`.
    pub residual: f64,
    /// Rounding floor of `residual`: `eps * max|diag S| / lambda`. No
    /// double precision vector can do better.
    pub residual_floor: f64,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project(basis: &[Vec<f64>], v: &mut [f64]) {
    for q in basis {
        let c = dot(q, v);
        v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
    }
}

/// Solves `P S P x = rhs` on the complement of the orthonormal `basis`
/// with Jacobi-preconditioned conjugate gradients.
fn projected_cg(
    gen: &DiscreteGenerator,
    diag_inv: &[f64],
    basis: &[Vec<f64>],
    rhs: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = rhs.len();
    let max_iter = 20 * n + 1000;
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    project(basis, &mut r);
    let r0 = norm(&r);
    if r0 == 0.0 {
        return Ok((x, 0));
    }
    let precondition = |r: &[f64]| {
        let mut z: Vec<f64> = r.iter().zip(diag_inv).map(|(a, b)| a * b).collect();
        project(basis, &mut z);
        z
    };
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        gen.apply(&p, &mut ap);
        project(basis, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonConvergence {
                iterations: it,
                change: f64::NAN,
            });
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        if norm(&r) <= tol * r0 {
            project(basis, &mut x);
            return Ok((x, it));
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        change: norm(&r) / r0,
    })
}

fn diag_inverse(gen: &DiscreteGenerator) -> Vec<f64> {
    gen.diagonal().into_iter().map(|d| 1.0 / d).collect()
}

fn residual(gen: &DiscreteGenerator, phi: &[f64], lambda: f64) -> Vec<f64> {
    let mut r = vec![0.0; phi.len()];
    gen.apply(phi, &mut r);
    r.iter_mut().zip(phi).for_each(|(ri, p)| *ri -= lambda * p);
    r
}

/// Rayleigh quotient of `-Q` from the positive Dirichlet form.
fn rayleigh(gen: &DiscreteGenerator, phi: &[f64]) -> f64 {
    gen.dirichlet_form(phi) / dot(phi, phi)
}

/// Inverse iteration for the lowest eigenpair of `S`, written as a
/// projected correction: `phi <- phi - z` with `P S P z = S phi - lambda phi`.
pub fn principal_eigenpair(
    gen: &DiscreteGenerator,
    tol: f64,
    max_iters: usize,
) -> Result<SpectralSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let diag_inv = diag_inverse(gen);
    let mut phi = gen.sqrt_weights().to_vec();
    let s = norm(&phi);
    phi.iter_mut().for_each(|v| *v /= s);
    let mut lambda = rayleigh(gen, &phi);
    let mut iterations = 0;
    let mut cg_total = 0;
    let mut converged = false;
    let mut change = f64::INFINITY;
    while iterations < max_iters {
        iterations += 1;
        let r = residual(gen, &phi, lambda);
        if r.iter().all(|&v| v == 0.0) {
            converged = true;
            break;
        }
        let basis = [phi.clone()];
        let (z, its) = projected_cg(gen, &diag_inv, &basis, &r, CG_TOL)?;
        cg_total += its;
        let step = norm(&z);
        phi.iter_mut().zip(&z).for_each(|(p, zi)| *p -= zi);
        let s = norm(&phi);
        phi.iter_mut().for_each(|v| *v /= s);
        let next = rayleigh(gen, &phi);
        change = if next == lambda {
            0.0
        } else {
            (next - lambda).abs() / next.abs().max(f64::MIN_POSITIVE)
        };
        lambda = next;
        if change <= tol && step <= VECTOR_TOL && iterations >= 2 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations, change });
    }
    if phi.iter().sum::<f64>() < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    let min = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NegativeEigenvector { min });
    }
    let r = residual(gen, &phi, lambda);
    let res = if lambda > 0.0 {
        norm(&r) / lambda
    } else {
        norm(&r)
    };
    let smax = gen.diagonal().into_iter().fold(0.0, f64::max);
    let floor = if lambda > 0.0 {
        f64::EPSILON * smax / lambda
    } else {
        f64::EPSILON * smax
    };
    let dvol = gen.delta.powi(gen.dimension() as i32);
    let c = 1.0 / (dot(&phi, &phi) * dvol).sqrt();
    let u = phi
        .iter()
        .zip(gen.sqrt_weights())
        .map(|(p, s)| c * p / s)
        .collect();
    Ok(SpectralSolution {
        h: gen.h,
        delta: gen.delta,
        lambda,
        u,
        phi,
        residual: res,
        residual_floor: floor,
        iterations,
        cg_iterations: cg_total,
        converged,
    })
}

/// Next eigenpair of `S` above the orthonormal vectors in `found`, by
/// deflated inverse iteration. Returns `(eigenvalue, unit vector)`.
pub fn deflated_eigenpair(
    gen: &DiscreteGenerator,
    found: &[Vec<f64>],
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let n = gen.n_unknowns();
    if found.len() >= n {
        return Err(Error::InvalidParameter(
            "no eigenvectors left to deflate".into(),
        ));
    }
    let diag_inv = diag_inverse(gen);
    let mut rng = rng::stream(seed, found.len() as u64, Substream::Sampling);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project(found, &mut x);
    let s = norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut y = vec![0.0; n];
    let mut rho = f64::INFINITY;
    for it in 1..=max_iters {
        let (next, _) = projected_cg(gen, &diag_inv, found, &x, CG_TOL)?;
        x = next;
        project(found, &mut x);
        let s = norm(&x);
        x.iter_mut().for_each(|v| *v /= s);
        gen.apply(&x, &mut y);
        let r = dot(&x, &y);
        let change = (r - rho).abs() / r.abs();
        rho = r;
        if change <= tol && it >= 2 {
            return Ok((rho, x));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        change: f64::NAN,
    })
}

/// First `k` eigenvalues (ascending, `k <= 3` in practice).
pub fn lowest_eigenvalues(gen: &DiscreteGenerator, k: usize, tol: f64) -> Result<Vec<f64>> {
    let first = principal_eigenpair(gen, tol, 200)?;
    let mut values = vec![first.lambda];
    let mut basis = vec![first.phi];
    while values.len() < k.min(gen.n_unknowns()) {
        let (l, v) = deflated_eigenpair(gen, &basis, tol.max(1e-10), 200, 0)?;
        values.push(l);
        basis.push(v);
    }
    Ok(values)
}

/// Number of eigenvalues of `-Q` below `threshold`, capped at 3.
pub fn small_eig_count(gen: &DiscreteGenerator, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be > 0, got {threshold}"
        )));
    }
    let first = principal_eigenpair(gen, 1e-12, 200)?;
    if first.lambda >= threshold {
        return Ok(0);
    }
    let mut basis = vec![first.phi];
    for count in 1..3 {
        if basis.len() >= gen.n_unknowns() {
            return Ok(count);
        }
        let (l, v) = deflated_eigenpair(gen, &basis, 1e-10, 200, 0)?;
        if l >= threshold {
            return Ok(count);
        }
        basis.push(v);
    }
    Ok(3)
}
