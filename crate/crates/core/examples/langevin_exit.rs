//! Overdamped Langevin exits from the square with a burn-in toward the
//! quasi-stationary distribution.

use kramers_exit::domain::{BoundaryPatch, DomainSpec, Face};
use kramers_exit::langevin::{self, SimConfig};
use kramers_exit::potential::PotentialSpec;

pub fn run(arg: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = arg.map(|s| s.parse()).transpose()?.unwrap_or(200);
    let p = PotentialSpec::cosine_lattice(1.0)?;
    let mut dom = DomainSpec::square(1.0)?;
    for (label, face, center) in [("east", "+x", [1.0, 0.0]), ("north", "+y", [0.0, 1.0])] {
        dom.add_patch(BoundaryPatch {
            label: label.into(),
            face: face.parse::<Face>()?,
            center: center.to_vec(),
            radius: 0.3,
        })?;
    }

    let mut cfg = SimConfig::new(0.8, 1e-3, vec![0.0, 0.0]);
    cfg.burn_in = langevin::default_burn_in(&p, &[0.0, 0.0])?;
    cfg.seed = 3;

    let one = langevin::simulate_exit(&cfg, &p, &dom)?;
    println!(
        "one exit: tau = {:.3} at {:?} ({}, {} restarts)",
        one.tau, one.exit_point, one.patch, one.restarts
    );

    let est = langevin::estimate(&cfg, &p, &dom, n)?;
    println!(
        "lambda = {:.4e} +- {:.1e} from {} exits",
        est.lambda_hat, est.lambda_se, est.n
    );
    for pe in &est.patches {
        println!(
            "  {:>6} {:.3} [{:.3}, {:.3}]",
            pe.label, pe.freq, pe.ci_low, pe.ci_high
        );
    }
    println!(
        "KS {:.4} (critical {:.4}), chi2 p = {:.3}",
        est.ks_statistic, est.ks_critical, est.chi2.p_value
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run(std::env::args().nth(1)).unwrap();
}
