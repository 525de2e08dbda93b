use serde::Serialize;
use std::collections::BTreeMap;

use super::eigen::SpectralSolution;
use super::generator::{BoundaryCondition, DiscreteGenerator};
use crate::domain::{DomainSpec, OTHER};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchFlux {
    pub label: String,
    /// `k(Sigma) = sum nu_i q(i -> b)` over exit edges into the patch.
    pub rate: f64,
    /// `k(Sigma) / sum k`.
    pub probability: f64,
    /// `(2/h) k(Sigma) M` in the unshifted normalization.
    pub flux: f64,
    pub log_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxReport {
    pub h: f64,
    pub delta: f64,
    pub lambda: f64,
    /// `M = sum u pi delta^d` with weights `e^{-2f/h}` and `u` normalized
    /// in the matching weighted norm.
    pub mass: f64,
    pub log_mass: f64,
    /// Declared patches in domain order, then `other`.
    pub patches: Vec<PatchFlux>,
    pub total_rate: f64,
    /// `|sum k - lambda| / lambda`.
    pub identity_rel_err: f64,
}

impl FluxReport {
    pub fn patch(&self, label: &str) -> Option<&PatchFlux> {
        self.patches.iter().find(|p| p.label == label)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitAnalysis {
    pub report: FluxReport,
    /// QSD density `nu_i / delta^d` per unknown.
    pub qsd_density: Vec<f64>,
    /// `(boundary node, P(X_tau = node))`, positive entries only.
    pub exit_law: Vec<(usize, f64)>,
}

pub fn exit_analysis(
    gen: &DiscreteGenerator,
    sol: &SpectralSolution,
    dom: &DomainSpec,
) -> Result<ExitAnalysis> {
    if !sol.converged {
        return Err(Error::Precondition(
            "eigen solution did not converge".into(),
        ));
    }
    if gen.bc != BoundaryCondition::DirichletAll {
        return Err(Error::Precondition(
            "exit analysis needs an all-Dirichlet assembly".into(),
        ));
    }
    let phi = &sol.phi;
    let s = gen.sqrt_weights();
    let fmin = gen.f_min();
    let h = gen.h;
    let a = gen.rate_scale();
    let dvol = gen.delta.powi(gen.dimension() as i32);
    let z: f64 = phi.iter().zip(s).map(|(p, w)| p * w).sum();

    let mut per_node: BTreeMap<usize, f64> = BTreeMap::new();
    for &(u, b) in gen.exit_edges() {
        // nu_i q(i -> b) = a phi_i e^{-(f_b - f_min)/h} / z
        let k = a * phi[u as usize] * (-(gen.potential(b) - fmin) / h).exp() / z;
        *per_node.entry(b).or_insert(0.0) += k;
    }
    let labels: Vec<String> = dom.labels();
    let mut rates = vec![0.0; labels.len() + 1];
    for (&b, &k) in &per_node {
        let x = gen.grid.point(b);
        let label = dom.patch_label(&x);
        let slot = labels
            .iter()
            .position(|l| l == label)
            .unwrap_or(labels.len());
        rates[slot] += k;
    }
    let total: f64 = rates.iter().sum();
    let lambda = sol.lambda;

    // unit-normalized u relative to f_min: sum u^2 pi delta^d = 1
    let m_rel = sol.u.iter().zip(s).map(|(u, w)| u * w * w).sum::<f64>() * dvol;
    let log_mass = m_rel.ln() - fmin / h;
    let patches = labels
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(OTHER))
        .zip(&rates)
        .map(|(label, &k)| {
            let log_flux = (2.0 / h).ln() + k.ln() + log_mass;
            PatchFlux {
                label: label.to_string(),
                rate: k,
                probability: k / total,
                flux: log_flux.exp(),
                log_flux,
            }
        })
        .collect();
    let qsd_density = phi.iter().zip(s).map(|(p, w)| p * w / (z * dvol)).collect();
    let exit_law = per_node
        .into_iter()
        .filter(|(_, k)| *k > 0.0)
        .map(|(b, k)| (b, k / total))
        .collect();
    Ok(ExitAnalysis {
        report: FluxReport {
            h,
            delta: gen.delta,
            lambda,
            mass: log_mass.exp(),
            log_mass,
            patches,
            total_rate: total,
            identity_rel_err: (total - lambda).abs() / lambda,
        },
        qsd_density,
        exit_law,
    })
}
