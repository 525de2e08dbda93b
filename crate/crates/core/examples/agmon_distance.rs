//! Agmon distance from the minimum of the lattice, its grid error bound and
//! the two separation hypotheses on the saddle patches.

use kramers_exit::agmon;
use kramers_exit::domain::DomainSpec;
use kramers_exit::landscape;
use kramers_exit::potential::PotentialSpec;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = PotentialSpec::cosine_lattice(1.5)?;
    let mut dom = DomainSpec::square(1.0)?;
    let delta = 0.01;

    let field = agmon::agmon_field(&p, &dom, &[0.0, 0.0], delta)?;
    for target in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -0.5]] {
        let d = field.value_at(&target);
        let gap = p.value(&target) - p.value(&[0.0, 0.0]);
        println!("d_a(0, {target:?}) = {d:.4}   f difference {gap:.4}");
    }
    println!("grid error bound {:.2e}", field.eps_grid);

    let props = agmon::check_agmon_properties(&p, &dom, &field, 500, 7)?;
    println!(
        "lower bound margin {:.2e}, triangle margin {:.2e}, passed {}",
        props.worst_lower_bound_margin, props.worst_triangle_margin, props.passed
    );

    let set = landscape::find_critical_points(&p, &dom, 9, 1e-10)?;
    let table = landscape::build_saddle_table(&set.points, &dom)?;
    table.attach_patches(&mut dom, 1.0)?;
    let fields = landscape::saddle_agmon_fields(&p, &dom, &table, 0.02)?;
    let hyp = landscape::check_hypotheses(&table, &dom, &fields)?;
    for e in &hyp.hypo1 {
        println!(
            "{}: inf distance {:.4} > {:.4} ({})",
            e.label, e.inf_distance, e.threshold, e.ok
        );
    }
    println!(
        "hypo2: {:.3} > {:.3} is {}",
        hyp.hypo2_lhs, hyp.hypo2_rhs, hyp.hypo2_ok
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
