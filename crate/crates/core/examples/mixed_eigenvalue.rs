//! Principal eigenvalue with one absorbing face and reflection elsewhere,
//! isolating a single exit channel.

use kramers_exit::domain::{DomainSpec, Face};
use kramers_exit::potential::PotentialSpec;
use kramers_exit::spectral;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = PotentialSpec::cosine_lattice(1.0)?;
    let sub = DomainSpec::new(vec![-0.6, -0.6], vec![1.0, 0.6])?;
    for h in [0.4, 0.3] {
        let m = spectral::mixed_eigenvalue(&p, &sub, Face::new(0, true), h, 0.01)?;
        let predicted = 2.0 * std::f64::consts::PI * h * (-4.0 / h).exp();
        println!(
            "h = {h}: lambda = {:.5e}, predicted {:.5e}, ratio {:.4}",
            m.lambda_witten,
            predicted,
            m.lambda_witten / predicted
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
