//! Evaluate the bundled potential families and check their analytic
//! derivatives against central differences.

use kramers_exit::potential::{Monomial, PotentialSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let lattice = PotentialSpec::cosine_lattice(1.5)?;
    // double well in x, harmonic in y
    let well = PotentialSpec::polynomial(
        2,
        vec![
            Monomial::new(0.25, &[4, 0]),
            Monomial::new(-0.5, &[2, 0]),
            Monomial::new(0.5, &[0, 2]),
        ],
    )?;
    let tilted = PotentialSpec::cosine_lattice(1.0)?.with_tilt(vec![0.1, 0.0])?;

    for (name, p) in [
        ("lattice c=1.5", &lattice),
        ("double well", &well),
        ("tilted lattice", &tilted),
    ] {
        let x = [0.3, -0.4];
        let e = p.evaluate(&x)?;
        let rep = p.verify_derivatives(&x, 1e-5)?;
        println!(
            "{name:>15}: f = {:+.6}, grad = [{:+.4}, {:+.4}], |grad err| = {:.1e}, |hess err| = {:.1e}",
            e.value, e.gradient[0], e.gradient[1], rep.grad_err, rep.hess_err
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
