// Simulate the update pipeline and compare it with both closed-form
// variants. Pass a packet count to change the horizon.
//
// Run with `cargo run --release --example simulate_pipeline -- 1000000`.

use noma_aoii::config::SystemConfig;
use noma_aoii::harness;
use noma_aoii::queueing::ArrivalMode;

pub fn run_example() -> noma_aoii::Result<()> {
    run(100_000)
}

fn run(packets: usize) -> noma_aoii::Result<()> {
    let mut cfg = SystemConfig::default();
    cfg.queue.mode = ArrivalMode::FlowConservation;
    let out = harness::cmd_simulate(&cfg, Some(42), Some(packets), None)?;

    let r = &out.report;
    println!("{} packets after warmup, seed {}", r.packets, r.seed);
    println!(
        "AoI sawtooth {:.6}  informative-update decomposition {:.6}  gap {:+.2e}",
        r.aoi_sawtooth, r.aoi_q_decomposition, r.estimator_gap
    );
    println!("overtaken updates: {:.2}%\n", 100.0 * r.overtaken_fraction);

    println!(
        "{:<22}{:>14}{:>14}{:>14}{:>10}",
        "metric", "departure", "flow", "simulated", "rel err"
    );
    for row in &out.comparison {
        println!(
            "{:<22}{:>14.6}{:>14.6}{:>14.6}{:>9.2}%",
            row.metric,
            row.analytic_paper_mode,
            row.analytic_flow_mode,
            row.simulated,
            100.0 * row.rel_err
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    match std::env::args().nth(1) {
        Some(arg) => run(arg
            .parse()
            .map_err(|_| noma_aoii::Error::Config(format!("`{arg}` is not a packet count")))?),
        None => run_example(),
    }
}
