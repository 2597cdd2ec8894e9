//! Run the bundled ten-week dummy account, then rebuild its records from
//! the event log alone.
//!
//! cargo run --release --example dummy_account_replay [scenario]

use std::path::PathBuf;

use metapriv::harness::{replay, simulate, Scenario};
use metapriv::world::{read_ndjson, to_ndjson_string};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/dummy10.scenario.json"));
    let scenario = Scenario::load(&path)?;
    let out = simulate(&scenario)?;
    println!("{}: {} events, {} records", scenario.name, out.world.log().len(), out.records.len());
    println!("{:<22} {:>6} {:>7} {:>6} {:>6}", "period", "likes", "noise", "P_th", "P_eff");
    for r in &out.records {
        println!(
            "{:<22} {:>6} {:>6.0}% {:>6.2} {:>6.2}",
            r.label,
            r.total_likes,
            100.0 * r.noise_like_share(),
            r.p_th().unwrap_or(f64::NAN),
            r.p_eff()
        );
    }

    let log = to_ndjson_string(out.world.log());
    let events = read_ndjson(log.as_bytes())?;
    let again = replay(&scenario, &events)?;
    println!("replayed from {} bytes of log: identical = {}", log.len(), again == out.records);
    Ok(())
}
