use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use noma_aoii::config::SystemConfig;
use noma_aoii::harness::{self, ExperimentSpec, Format};
use noma_aoii::Result;

/// Age of Incorrect Information for uplink NOMA semantic communication.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form delays, AoI, AoII, similarities and rates.
    Analytic { config: PathBuf },
    /// Monte-Carlo run compared against both closed-form variants.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        packets: Option<usize>,
        /// Per-packet trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimum-AoII policy with the outer-grid trace.
    Optimize { config: PathBuf },
    /// Parameter sweep as a long-format table.
    Sweep { experiment: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let default_format = match cli.command {
        Command::Sweep { .. } => Format::Csv,
        _ => Format::Json,
    };
    let format = match cli.format {
        Some(OutputFormat::Csv) => Format::Csv,
        Some(OutputFormat::Json) => Format::Json,
        None => default_format,
    };
    let mut buf = Vec::new();
    match cli.command {
        Command::Analytic { config } => {
            let report = harness::cmd_analytic(&SystemConfig::load(config)?)?;
            harness::write_metrics(&report.metrics(), format, &mut buf)?;
        }
        Command::Simulate {
            config,
            seed,
            packets,
            trace,
        } => {
            let cfg = SystemConfig::load(config)?;
            let out = harness::cmd_simulate(&cfg, seed, packets, trace.as_deref())?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut buf, &out)?;
                    writeln!(buf)?;
                }
                Format::Csv => harness::write_rows(&out.comparison, format, &mut buf)?,
            }
        }
        Command::Optimize { config } => {
            let out = harness::cmd_optimize(&SystemConfig::load(config)?)?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut buf, &out)?;
                    writeln!(buf)?;
                }
                Format::Csv => harness::write_rows(&out.trace, format, &mut buf)?,
            }
        }
        Command::Sweep { experiment } => {
            let rows = harness::cmd_sweep(&ExperimentSpec::load(experiment)?)?;
            harness::write_rows(&rows, format, &mut buf)?;
        }
    }
    match cli.out {
        Some(path) => BufWriter::new(File::create(path)?).write_all(&buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}
