use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metapriv::harness::{self, HarnessError};
use metapriv::metrics::round2;

#[derive(Parser)]
#[command(name = "metapriv", version, about = "Profile obfuscation simulator and privacy metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the event log, records, summary and plots.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long, env = "METAPRIV_SEED")]
        seed: Option<u64>,
    },
    /// Recompute records and plots from an event log.
    Report {
        log: PathBuf,
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Seed the log was produced with, if it differs from the scenario's.
        #[arg(long, env = "METAPRIV_SEED")]
        seed: Option<u64>,
    },
    /// Render charts from a records.json file.
    Plot {
        records: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { scenario, output, seed } => {
            let run = harness::run_scenario(&scenario, &output, seed)?;
            let s = &run.summary;
            println!(
                "{}: seed {}, {} events over {} ticks, {} records",
                s.name, s.seed, s.events, s.ticks, s.records
            );
            for r in &run.records {
                println!("  {:>2} {:<12} {}", r.period, r.label, r.privacy.summary_line());
            }
            if !s.target_shortfall.is_empty() {
                eprintln!("warning: like targets not met: {:?}", s.target_shortfall);
            }
            println!("wrote {}", output.display());
        }
        Command::Report { log, scenario, output, seed } => {
            let records = harness::report(&log, &scenario, &output, seed)?;
            for r in &records {
                println!("  {:>2} {:<12} {}", r.period, r.label, r.privacy.summary_line());
            }
            println!("wrote {} records to {}", records.len(), output.display());
        }
        Command::Plot { records, output } => {
            for path in harness::plot(&records, &output)? {
                println!("{}", path.display());
            }
        }
        Command::Validate { scenario } => {
            let s = harness::validate(&scenario)?;
            let scheduled = s.total_ticks() - s.warmup_ticks;
            let weeks = round2(scheduled as f64 / 168.0);
            println!(
                "{}: ok ({} periods, {scheduled} ticks = {weeks} weeks, plus {} warm-up ticks)",
                s.name,
                s.schedule.len(),
                s.warmup_ticks
            );
        }
    }
    Ok(())
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
