//! Reversible jump-chain discretization of the generator
//! `L = -(h/2) Laplacian + grad f . grad` on a box: principal Dirichlet
//! eigenpair, quasi-stationary distribution, exit law and boundary fluxes,
//! and the mixed Dirichlet-Neumann principal eigenvalue.

mod eigen;
mod exit;
mod generator;
mod mixed;

pub use eigen::{
    deflated_eigenpair, lowest_eigenvalues, principal_eigenpair, small_eig_count, SpectralSolution,
    CG_TOL,
};
pub use exit::{exit_analysis, ExitAnalysis, FluxReport, PatchFlux};
pub use generator::{assemble, BoundaryCondition, DiscreteGenerator, MIN_NODES};
pub use mixed::{mixed_eigenvalue, MixedEigen};

use crate::domain::DomainSpec;
use crate::error::Result;
use crate::potential::PotentialSpec;

/// Assemble, solve and analyse the all-Dirichlet problem in one call.
pub fn solve_dirichlet(
    p: &PotentialSpec,
    dom: &DomainSpec,
    h: f64,
    delta: f64,
) -> Result<(SpectralSolution, ExitAnalysis)> {
    let gen = assemble(p, dom, h, delta, BoundaryCondition::DirichletAll)?;
    let sol = principal_eigenpair(&gen, 1e-12, 200)?;
    let analysis = exit_analysis(&gen, &sol, dom)?;
    Ok((sol, analysis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryPatch;
    use crate::error::Error;
    use std::f64::consts::PI;

    fn lattice_domain(rho: f64) -> DomainSpec {
        let mut d = DomainSpec::square(1.0).unwrap();
        for (l, f, c) in [
            ("z1", "-x", [-1.0, 0.0]),
            ("z2", "+x", [1.0, 0.0]),
            ("z3", "-y", [0.0, -1.0]),
            ("z4", "+y", [0.0, 1.0]),
        ] {
            d.add_patch(BoundaryPatch {
                label: l.into(),
                face: f.parse().unwrap(),
                center: c.to_vec(),
                radius: rho,
            })
            .unwrap();
        }
        d
    }

    #[test]
    fn flat_box_matches_laplacian_mode() {
        let p = PotentialSpec::constant(2, 0.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        let gen = assemble(&p, &d, 1.0, 0.01, BoundaryCondition::DirichletAll).unwrap();
        let sol = principal_eigenpair(&gen, 1e-12, 200).unwrap();
        let exact = PI * PI / 4.0;
        assert!((sol.lambda / exact - 1.0).abs() < 0.01, "{}", sol.lambda);
        assert_eq!(small_eig_count(&gen, 0.5 * exact).unwrap(), 0);
        // second mode is (h/2)(pi/2)^2 * 5
        assert!(small_eig_count(&gen, 3.0 * exact).unwrap() >= 2);
    }

    #[test]
    fn eigenvector_is_positive_and_normalized() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = lattice_domain(1.0);
        let gen = assemble(&p, &d, 0.4, 0.025, BoundaryCondition::DirichletAll).unwrap();
        let sol = principal_eigenpair(&gen, 1e-12, 200).unwrap();
        assert!(sol.u.iter().all(|&u| u > 0.0));
        let norm: f64 = sol
            .u
            .iter()
            .zip(gen.sqrt_weights())
            .map(|(u, s)| u * u * s * s)
            .sum::<f64>()
            * gen.delta.powi(2);
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(
            sol.residual <= 1e-12 + 100.0 * sol.residual_floor,
            "{} {}",
            sol.residual,
            sol.residual_floor
        );
        let ratio = sol.lambda * 10f64.exp() / (4.0 * PI);
        assert!((0.5..1.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn exit_rates_sum_to_lambda_and_are_symmetric() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = lattice_domain(1.0);
        let (sol, an) = solve_dirichlet(&p, &d, 0.4, 0.02).unwrap();
        let r = &an.report;
        assert!(r.identity_rel_err < 1e-10, "{}", r.identity_rel_err);
        for k in &r.patches[..4] {
            assert!((k.rate / sol.lambda - 0.25).abs() < 1e-6);
        }
        assert_eq!(r.patch("other").unwrap().rate, 0.0);
        let law: f64 = an.exit_law.iter().map(|(_, p)| p).sum();
        assert!((law - 1.0).abs() < 1e-12);
        let qsd: f64 = an.qsd_density.iter().sum::<f64>() * 0.02 * 0.02;
        assert!((qsd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_patches_send_mass_to_other() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = lattice_domain(0.2);
        let (_, an) = solve_dirichlet(&p, &d, 0.4, 0.02).unwrap();
        let other = an.report.patch("other").unwrap();
        assert!(other.rate > 0.0 && other.probability < 0.3, "{other:?}");
        assert!(an.report.identity_rel_err < 1e-10);
    }

    #[test]
    fn second_eigenvalue_is_separated() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        let gen = assemble(&p, &d, 0.4, 0.025, BoundaryCondition::DirichletAll).unwrap();
        let l = lowest_eigenvalues(&gen, 2, 1e-12).unwrap();
        assert!(l[1] > 10.0 * l[0], "{l:?}");
        assert_eq!(small_eig_count(&gen, 0.04).unwrap(), 1);
    }

    #[test]
    fn neumann_flat_box_has_zero_eigenvalue() {
        let p = PotentialSpec::constant(2, 1.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        let gen = assemble(
            &p,
            &d,
            0.5,
            0.1,
            BoundaryCondition::Mixed { dirichlet: vec![] },
        )
        .unwrap();
        let sol = principal_eigenpair(&gen, 1e-12, 200).unwrap();
        assert_eq!(sol.lambda, 0.0);
        let u0 = sol.u[0];
        assert!(sol.u.iter().all(|u| (u - u0).abs() < 1e-12 * u0));
    }

    #[test]
    fn mixed_problem_checks_and_value() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let sub = DomainSpec::new(vec![-0.6, -0.6], vec![1.0, 0.6]).unwrap();
        let m = mixed_eigenvalue(&p, &sub, "+x".parse().unwrap(), 0.35, 0.02).unwrap();
        assert!(m.min_neumann_normal_derivative > 0.0);
        assert!((m.lambda_witten - 2.0 * 0.35 * m.mu_gen).abs() < 1e-15);
        let ratio = m.lambda_witten / (2.0 * PI * 0.35 * (-4.0f64 / 0.35).exp());
        assert!((0.5..1.5).contains(&ratio), "{ratio}");
        // the saddle is not on -x
        assert!(matches!(
            mixed_eigenvalue(&p, &sub, "-x".parse().unwrap(), 0.35, 0.02),
            Err(Error::Precondition(_))
        ));
        // the full box has four saddles
        let full = DomainSpec::square(1.0).unwrap();
        assert!(matches!(
            mixed_eigenvalue(&p, &full, "+x".parse().unwrap(), 0.35, 0.05),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn grid_refinement_is_second_order() {
        let p = PotentialSpec::cosine_lattice(1.0).unwrap();
        let d = DomainSpec::square(1.0).unwrap();
        let lam = |delta: f64| {
            let g = assemble(&p, &d, 0.4, delta, BoundaryCondition::DirichletAll).unwrap();
            principal_eigenpair(&g, 1e-12, 200).unwrap().lambda
        };
        let (a, b, c) = (lam(0.04), lam(0.02), lam(0.01));
        let r = (a - b).abs() / (b - c).abs();
        assert!((3.0..5.0).contains(&r), "{r}");
    }
}
