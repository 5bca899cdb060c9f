// SINR under SIC, similarity, semantic rate and feasibility for the default
// six-user uplink, plus a brute-force look at whether every user at full
// power maximizes the mean similarity.
//
// Run with `cargo run --example noma_similarity`.

use noma_aoii::config::{self, SystemConfig};
use noma_aoii::{optimizer, semantic};

pub fn run_example() -> noma_aoii::Result<()> {
    let cfg = SystemConfig::default();
    let scenario = cfg.scenario()?;
    let lp = cfg.logistic;

    println!("user  gain     power(dBm)  SINR        similarity  rate(suts/s)");
    let report = semantic::check_feasibility(&scenario, &lp);
    for (k, (u, f)) in scenario.users.iter().zip(&report.users).enumerate() {
        println!(
            "{:>4}  {:.4}  {:>10.2}  {:>10.4}  {:>10.6}  {:>12.2}",
            k + 1,
            u.gain_sq,
            config::watts_to_dbm(u.power),
            f.sinr,
            f.similarity,
            f.rate
        );
    }
    println!(
        "feasible: {} (min rate {:.2}, min similarity {:.4})",
        report.feasible(),
        report.min_rate,
        report.min_similarity
    );

    println!("\nmean similarity against a common transmit power");
    for dbm in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let s = scenario.with_common_power(config::dbm_to_watts(dbm));
        let xi: Vec<f64> = semantic::sinr_vector(&s)
            .iter()
            .map(|&g| semantic::similarity(g, &lp))
            .collect();
        println!(
            "{dbm:>6.1} dBm  {:.6}",
            xi.iter().sum::<f64>() / xi.len() as f64
        );
    }

    let diag = optimizer::power_grid_diagnostic(&scenario, &lp, 4)?;
    println!(
        "\npower grid ({} vectors): best mean similarity {:.6}, all at p_max {:.6}",
        diag.evaluated, diag.best_mean_similarity, diag.pmax_mean_similarity
    );
    let dbm: Vec<String> = diag
        .best_powers
        .iter()
        .map(|p| format!("{:.1}", config::watts_to_dbm(*p)))
        .collect();
    println!("best powers (dBm): [{}]", dbm.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    run_example()
}
