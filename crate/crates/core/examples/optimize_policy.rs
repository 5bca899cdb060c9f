// Minimum-AoII policy by exact linear search over the scheduler rate, and
// the Hessian of the AoI in the two server rates.
//
// Run with `cargo run --example optimize_policy`.

use noma_aoii::config::SystemConfig;
use noma_aoii::{harness, optimizer};

pub fn run_example() -> noma_aoii::Result<()> {
    let cfg = SystemConfig::default();
    let out = harness::cmd_optimize(&cfg)?;
    println!(
        "mu0 = {:.4}  mu1 = {:.4}  mu2 = {:.4}",
        out.mu0, out.mu1, out.mu2
    );
    println!(
        "AoI min {:.6}  mean similarity {:.6}  AoII min {:.6}",
        out.aoi_min, out.mean_similarity, out.aoii_min
    );
    let feasible = out.trace.iter().filter(|t| t.feasible).count();
    println!(
        "{} grid points, {} stable, best at index {}",
        out.trace.len(),
        feasible,
        out.best_index
    );

    let qp = cfg.queue_params().with_rates(17.5, 12.5, 7.5);
    let h = optimizer::hessian_check(&qp, 17.5)?;
    println!(
        "\nHessian at (17.5, 12.5, 7.5): Z1 {:.6e}  Z2 {:.2e}  Z3 {:.2e}  Z4 {:.6e}  PSD {}",
        h.z1, h.z2, h.z3, h.z4, h.is_psd
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    run_example()
}
