//! Low end of the discrete spectrum: one exponentially small eigenvalue
//! per local minimum, then a gap.

use kramers_exit::domain::DomainSpec;
use kramers_exit::potential::PotentialSpec;
use kramers_exit::spectral::{self, BoundaryCondition};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = PotentialSpec::cosine_lattice(1.0)?;
    let dom = DomainSpec::square(1.0)?;
    let h = 0.3;
    let gen = spectral::assemble(&p, &dom, h, 0.025, BoundaryCondition::DirichletAll)?;
    let eigs = spectral::lowest_eigenvalues(&gen, 3, 1e-10)?;
    let shown: Vec<String> = eigs.iter().map(|e| format!("{e:.4e}")).collect();
    println!("lowest eigenvalues at h = {h}: {}", shown.join(", "));
    println!(
        "count below {:.3}: {}",
        0.1 * h,
        spectral::small_eig_count(&gen, 0.1 * h)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
