//! Principal eigenpair of the discrete generator, the quasi-stationary
//! exit law per patch and the boundary fluxes against their asymptotics.

use kramers_exit::domain::DomainSpec;
use kramers_exit::landscape;
use kramers_exit::potential::PotentialSpec;
use kramers_exit::rates;
use kramers_exit::spectral;

pub fn run(arg: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let h: f64 = arg.map(|s| s.parse()).transpose()?.unwrap_or(0.4);
    let delta = 0.02;
    let p = PotentialSpec::cosine_lattice(1.5)?;
    let mut dom = DomainSpec::square(1.0)?;
    let set = landscape::find_critical_points(&p, &dom, 9, 1e-10)?;
    let table = landscape::build_saddle_table(&set.points, &dom)?;
    table.attach_patches(&mut dom, 0.5)?;

    let (sol, exit) = spectral::solve_dirichlet(&p, &dom, h, delta)?;
    let rep = &exit.report;
    let ek = rates::predict(&table, h)?;
    println!(
        "lambda = {:.5e} (closed form {:.5e}), {} iterations",
        sol.lambda, ek.lambda, sol.iterations
    );
    println!(
        "sum of patch rates matches lambda to {:.1e}",
        rep.identity_rel_err
    );
    for (k, pf) in rep.patches.iter().enumerate() {
        match ek.saddles.get(k) {
            Some(s) => println!(
                "  {:>5}: p = {:.5}, flux {:.4e} vs {:.4e}",
                pf.label, pf.probability, pf.flux, s.flux
            ),
            None => println!(
                "  {:>5}: p = {:.5}, flux {:.4e}",
                pf.label, pf.probability, pf.flux
            ),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run(std::env::args().nth(1)).unwrap();
}
