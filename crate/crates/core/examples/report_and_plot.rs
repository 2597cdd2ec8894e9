//! Write a full run to disk, recompute its report from the log and render
//! the charts from records.json.
//!
//! cargo run --release --example report_and_plot -- [out_dir]

use std::path::{Path, PathBuf};

use metapriv::harness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("metapriv-example"));
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/account_a.scenario.json");

    let run = harness::run_scenario(&scenario, &out.join("run"), None)?;
    println!("simulated {} events into {}", run.summary.events, out.join("run").display());

    let records = harness::report(&out.join("run/events.ndjson"), &scenario, &out.join("report"), None)?;
    for r in &records {
        println!("  {:<18} {}", r.label, r.privacy.summary_line());
    }

    for svg in harness::plot(&out.join("report/records.json"), &out.join("plots"))? {
        println!("wrote {}", svg.display());
    }
    print!("{}", harness::records_csv(&records[records.len() - 1..]));
    Ok(())
}
