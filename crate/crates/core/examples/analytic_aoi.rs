// Closed-form delays, AoI and AoII at the default operating point, and the
// embedded D/M/1 chain checked against its geometric stationary law.
//
// Run with `cargo run --example analytic_aoi`.

use noma_aoii::config::SystemConfig;
use noma_aoii::harness;
use noma_aoii::queueing::{self, ArrivalMode, QueueParams};

pub fn run_example() -> noma_aoii::Result<()> {
    let cfg = SystemConfig::default();
    let report = harness::cmd_analytic(&cfg)?;
    for (name, value) in report.metrics() {
        println!("{name:>18}  {value:.10}");
    }

    let flow = QueueParams {
        mode: ArrivalMode::FlowConservation,
        ..cfg.queue_params()
    };
    let aoi = queueing::average_aoi(&flow)?;
    println!(
        "\nflow conservation: cat1 {:.6}  cat2 {:.6}  blended {:.6}",
        aoi.aoi_cat1, aoi.aoi_cat2, aoi.aoi_blended
    );

    println!("\n rho   eta       TV(chain, geometric)");
    for rho in [0.3, 0.5, 0.8] {
        let eta = queueing::eta_dm1(rho)?;
        let p = queueing::dm1_transition_matrix(rho, queueing::DEFAULT_TRUNCATION)?;
        let pi = queueing::stationary_distribution(&p, 1e-14, 100_000)?;
        let tv: f64 = pi
            .iter()
            .enumerate()
            .map(|(j, x)| (x - (1.0 - eta) * eta.powi(j as i32)).abs())
            .sum::<f64>()
            / 2.0;
        println!("{rho:.1}  {eta:.6}  {tv:.2e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    run_example()
}
