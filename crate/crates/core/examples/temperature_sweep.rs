//! Sweep the temperature and fit the exponential rate law.

use kramers_exit::harness::{self, ExperimentConfig, SweepAxis};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.rho = harness::Auto::Value(1.0);
    cfg.spectral.delta = vec![0.02];
    let table = harness::sweep(&cfg, SweepAxis::H, &[0.6, 0.5, 0.4, 0.3])?;
    for r in &table.rows {
        println!(
            "h = {:<4} lambda = {:.5e}  lambda / closed form = {:.4}",
            r.h, r.lambda.value, r.ratio
        );
    }
    println!(
        "slope {:.4} (closed form {:.4}, expected {:.1})",
        table.slope.unwrap_or(f64::NAN),
        table.slope_ek.unwrap_or(f64::NAN),
        table.target_slope.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
