//! Locate the critical points of a cosine lattice on the closed square,
//! build the saddle table and count generalized critical points.

use kramers_exit::domain::DomainSpec;
use kramers_exit::landscape;
use kramers_exit::potential::PotentialSpec;

pub fn run(arg: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let c: f64 = arg.map(|s| s.parse()).transpose()?.unwrap_or(1.5);
    let p = PotentialSpec::cosine_lattice(c)?;
    let dom = DomainSpec::square(1.0)?;

    let set = landscape::find_critical_points(&p, &dom, 9, 1e-10)?;
    for cp in &set.points {
        let tag = match &cp.boundary {
            None => "interior".to_string(),
            Some(b) => format!("face {} mu = {:+.4}", b.face, b.mu),
        };
        println!(
            "{:>22?}  f = {:+.4}  index {}  {tag}",
            cp.location, cp.value, cp.index
        );
    }

    let report = landscape::check_assumptions(&p, &dom, &set.points, 200);
    println!("basin assumption holds: {}", report.a_ok);

    let table = landscape::build_saddle_table(&set.points, &dom)?;
    println!(
        "{} saddles, {} at the lowest level, barrier {:.4}",
        table.saddles.len(),
        table.n0,
        table.barrier()
    );
    for s in &table.saddles {
        println!(
            "  {} at {:?}: f = {:.4}, |mu| = {:.4}",
            s.label, s.location, s.value, s.abs_mu
        );
    }

    let counts = landscape::count_generalized(&set.points, dom.dimension());
    println!("generalized counts m_q = {:?}", counts.m_total);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run(std::env::args().nth(1)).unwrap();
}
