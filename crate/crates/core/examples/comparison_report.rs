//! Closed form, discrete generator and simulation side by side, driven by a
//! configuration file.

use kramers_exit::harness::{self, ExperimentConfig, Stages};

const CONFIG: &str = r#"
seed = 5

[potential]
family = "cosine_lattice"
c = 1.5

[domain]
rho = 1.0

[rates]
h = [0.5, 0.3]

[spectral]
delta = [0.01]
count_h = 0.3

[kmc]
h = 0.5
n = 20000
"#;

pub fn run(arg: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match arg {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_toml(CONFIG)?,
    };
    let stages = Stages {
        langevin: false,
        mixed: false,
        agmon: false,
        ..Stages::ALL
    };
    let (report, err) = harness::run_partial(&cfg, stages);
    if let Some(e) = err {
        return Err(e.into());
    }
    for row in &report.rows {
        println!(
            "h = {}: lambda ek {:.4e}, spectral {:.4e}",
            row.h,
            row.lambda_ek.value,
            row.lambda_spec.map(|c| c.value).unwrap_or(f64::NAN)
        );
        for p in &row.patches {
            let spec = p.probability_spec.map(|c| c.value).unwrap_or(f64::NAN);
            println!(
                "    {:>5}: {:.5} / {:.5}",
                p.label, p.probability_ek.value, spec
            );
        }
    }
    for a in &report.assertions {
        println!("{} {}", if a.passed { "ok  " } else { "FAIL" }, a.name);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run(std::env::args().nth(1)).unwrap();
}
