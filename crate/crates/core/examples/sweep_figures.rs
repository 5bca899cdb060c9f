// Run one of the shipped experiment files and print its long-format table.
// Pass a path to run a different experiment.
//
// Run with `cargo run --example sweep_figures -- configs/experiments/aoii_vs_power_and_update_rate.toml`.

use std::path::{Path, PathBuf};

use noma_aoii::harness::{self, ExperimentSpec, Format};

pub fn run_example() -> noma_aoii::Result<()> {
    run(&PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs/experiments/server1_delay_vs_rate.toml"))
}

fn run(path: &Path) -> noma_aoii::Result<()> {
    let spec = ExperimentSpec::load(path)?;
    let rows = harness::cmd_sweep(&spec)?;
    harness::write_rows(&rows, Format::Csv, std::io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    match std::env::args().nth(1) {
        Some(path) => run(Path::new(&path)),
        None => run_example(),
    }
}
