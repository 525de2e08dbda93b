use serde::Serialize;

use super::eigen::principal_eigenpair;
use super::generator::{assemble, BoundaryCondition};
use crate::domain::{DomainSpec, Face};
use crate::error::{Error, Result};
use crate::landscape::{self, NORMAL_DERIVATIVE_TOL};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedEigen {
    pub h: f64,
    pub delta: f64,
    pub dirichlet_face: Face,
    /// Principal eigenvalue of the generator `-Q`.
    pub mu_gen: f64,
    /// `2 h mu_gen`, the Witten Laplacian normalization.
    pub lambda_witten: f64,
    /// Smallest sampled `d_n f` over the reflecting faces.
    pub min_neumann_normal_derivative: f64,
    pub saddle: Vec<f64>,
    pub minimum: Vec<f64>,
}

/// Samples per reflecting face for the sign check.
const NEUMANN_SAMPLES: usize = 200;

/// Principal eigenvalue on `dom_sub`, absorbing on `dirichlet_face` and
/// reflecting on every other face.
pub fn mixed_eigenvalue(
    p: &PotentialSpec,
    dom_sub: &DomainSpec,
    dirichlet_face: Face,
    h: f64,
    delta: f64,
) -> Result<MixedEigen> {
    let points = landscape::find_critical_points(p, dom_sub, 9, 1e-10)?.points;
    let interior: Vec<_> = points.iter().filter(|c| c.boundary.is_none()).collect();
    if interior.len() != 1 || interior[0].index != 0 {
        return Err(Error::Precondition(format!(
            "subdomain must contain exactly one interior critical point, a minimum (found {})",
            interior.len()
        )));
    }
    let saddles: Vec<_> = points
        .iter()
        .filter(|c| {
            c.boundary
                .as_ref()
                .is_some_and(|b| b.restricted_index == 0 && b.full_gradient_zero && b.mu < 0.0)
        })
        .collect();
    if saddles.len() != 1 {
        return Err(Error::Precondition(format!(
            "subdomain must have exactly one boundary saddle, found {}",
            saddles.len()
        )));
    }
    if !dom_sub.on_face(dirichlet_face, &saddles[0].location, 1e-9) {
        return Err(Error::Precondition(format!(
            "saddle {:?} is not on the Dirichlet face {dirichlet_face}",
            saddles[0].location
        )));
    }
    let min_dn = min_normal_derivative(p, dom_sub, dirichlet_face);
    if min_dn < -NORMAL_DERIVATIVE_TOL {
        return Err(Error::Precondition(format!(
            "outward normal derivative {min_dn:.3e} < 0 on a reflecting face"
        )));
    }
    let gen = assemble(
        p,
        dom_sub,
        h,
        delta,
        BoundaryCondition::Mixed {
            dirichlet: vec![dirichlet_face],
        },
    )?;
    let sol = principal_eigenpair(&gen, 1e-12, 200)?;
    Ok(MixedEigen {
        h,
        delta,
        dirichlet_face,
        mu_gen: sol.lambda,
        lambda_witten: 2.0 * h * sol.lambda,
        min_neumann_normal_derivative: min_dn,
        saddle: saddles[0].location.clone(),
        minimum: interior[0].location.clone(),
    })
}

/// Points of the reflecting faces that are not on the Dirichlet face.
fn min_normal_derivative(p: &PotentialSpec, dom: &DomainSpec, dirichlet: Face) -> f64 {
    let d = dom.dimension();
    let mut best = f64::INFINITY;
    for face in dom.faces().into_iter().filter(|f| *f != dirichlet) {
        let tang = dom.tangential_axes(face);
        let per_axis = if tang.is_empty() {
            1
        } else {
            ((NEUMANN_SAMPLES as f64)
                .powf(1.0 / tang.len() as f64)
                .ceil() as usize)
                .max(2)
        };
        let total = per_axis.pow(tang.len() as u32);
        for code in 0..total {
            let mut x = vec![0.0; d];
            x[face.axis] = dom.face_coordinate(face);
            let mut c = code;
            for &a in &tang {
                let i = c % per_axis;
                c /= per_axis;
                x[a] = dom.lower()[a] + dom.extent(a) * i as f64 / (per_axis - 1).max(1) as f64;
            }
            if dom.on_face(dirichlet, &x, 1e-12) {
                continue;
            }
            best = best.min(face.sign() * p.gradient(&x)[face.axis]);
        }
    }
    best
}
