//! Closed-form exit rates, exit probabilities, fluxes and a temperature
//! extrapolation for the anisotropic lattice.

use kramers_exit::domain::DomainSpec;
use kramers_exit::landscape;
use kramers_exit::potential::PotentialSpec;
use kramers_exit::rates;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = PotentialSpec::cosine_lattice(1.5)?;
    let dom = DomainSpec::square(1.0)?;
    let set = landscape::find_critical_points(&p, &dom, 9, 1e-10)?;
    let table = landscape::build_saddle_table(&set.points, &dom)?;

    for r in rates::ek_rates(&table)? {
        println!(
            "{}: prefactor {:.5}, barrier {:.3}",
            r.label, r.prefactor, r.barrier
        );
    }

    println!(
        "\n{:>5} {:>12} {:>9} {:>9} {:>9}",
        "h", "lambda", "p(z1)", "p(z3)", "other"
    );
    for h in [0.5, 0.4, 0.3, 0.2] {
        let pred = rates::predict(&table, h)?;
        println!(
            "{h:>5} {:>12.5e} {:>9.5} {:>9.2e} {:>9.2e}",
            pred.lambda,
            pred.saddles[0].probability,
            pred.saddles[2].probability,
            pred.other_probability
        );
    }

    let t_hi = 1.0 / rates::lambda_h_asymptotic(&table, 0.5)?;
    let t_lo = rates::tad_extrapolate(&table, 0, t_hi, 0.5, 0.25)?;
    println!("\nmean exit time {t_hi:.3} at h = 0.5 extrapolates to {t_lo:.4e} at h = 0.25");
    println!(
        "direct closed form at h = 0.25: {:.4e}",
        1.0 / rates::lambda_h_asymptotic(&table, 0.25)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
