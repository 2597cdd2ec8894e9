//! Scenario runs: the weekly schedule engine, log replay, record files and
//! charts.
//!
//! A run writes into its output directory:
//! - `events.ndjson`: the interaction log
//! - `records.json` / `records.csv`: one [`WeeklyRecord`] per analysed period
//! - `summary.json`: run counters
//! - `scenario.json`: the scenario as run (seed overrides applied)
//! - `plots/*.svg`

mod engine;
mod plot;
mod scenario;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::metrics::round2;
use crate::world::{read_ndjson, to_ndjson_string};

pub use engine::{replay, simulate, RunOutput, RunSummary, WeeklyRecord};
pub use plot::{charts, render_plots, Chart, Series};
pub use scenario::{AllocationSpec, AnalysisPlan, NoiseSpec, Period, SampleSizes, Scenario, UNRELATED};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario at `{path}`: {message}")]
    Scenario { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("event log: {0}")]
    Log(String),
    #[error("records: {0}")]
    Records(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Scenario { .. } => 3,
            HarnessError::Io { .. } => 4,
            HarnessError::Log(_) | HarnessError::Records(_) => 5,
            HarnessError::Simulation(_) => 6,
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

const CSV_HEADER: [&str; 16] = [
    "period",
    "label",
    "group",
    "likes",
    "main",
    "suggested",
    "main_video",
    "latest_video",
    "total_main",
    "total_suggested",
    "total_main_video",
    "total_latest_video",
    "strength",
    "p_th",
    "p_eff",
    "verdict",
];

/// Records as CSV: per period one `real` row, one `noise` row, then one row
/// per attribute. Strength and privacy values are rounded to two decimals.
pub fn records_csv(records: &[WeeklyRecord]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        let p = &r.privacy;
        let c = &p.counts;
        let likes_of = |attrs: &mut dyn Iterator<Item = &crate::world::AttributeId>| -> u64 {
            attrs
                .filter_map(|a| r.keywords.get(a))
                .filter_map(|k| r.likes.get(k))
                .sum()
        };
        let mut rows = vec![
            ("real".to_string(), likes_of(&mut c.real_attrs.iter()), c.real, p.real.strength),
            ("noise".to_string(), likes_of(&mut c.noise_attrs.iter()), c.noise, p.noise.strength),
        ];
        for s in &p.per_attribute {
            let Some(a) = s.attribute else { continue };
            let keyword = r.keywords.get(&a).cloned().unwrap_or_else(|| a.to_string());
            let likes = r.likes.get(&keyword).copied().unwrap_or(0);
            let counts = c.per_attribute.get(&a).copied().unwrap_or_default();
            rows.push((keyword, likes, counts, s.strength));
        }
        let p_th = p.p_th.map(|v| format!("{:.2}", round2(v))).unwrap_or_default();
        let verdict = serde_json::to_value(p.verdict)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        for (group, likes, counts, strength) in rows {
            let mut fields = vec![r.period.to_string(), r.label.clone(), group, likes.to_string()];
            fields.extend(counts.as_array().iter().map(u64::to_string));
            fields.extend(c.total.as_array().iter().map(u64::to_string));
            fields.push(format!("{:.2}", round2(strength)));
            fields.push(p_th.clone());
            fields.push(format!("{:.2}", round2(p.p_eff)));
            fields.push(verdict.clone());
            out.write_record(&fields).expect("in-memory write");
        }
    }
    String::from_utf8(out.into_inner().expect("flush")).expect("utf-8")
}

fn records_json(records: &[WeeklyRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize") + "\n"
}

fn write_records(out_dir: &Path, records: &[WeeklyRecord]) -> Result<Vec<PathBuf>, HarnessError> {
    write(&out_dir.join("records.json"), records_json(records))?;
    write(&out_dir.join("records.csv"), records_csv(records))?;
    write_plots(&out_dir.join("plots"), records)
}

fn write_plots(dir: &Path, records: &[WeeklyRecord]) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    for (name, svg) in render_plots(records) {
        let path = dir.join(name);
        write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn load_with_seed(path: &Path, seed: Option<u64>) -> Result<Scenario, HarnessError> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

/// Runs the scenario file and writes the full output tree into `out_dir`.
pub fn run_scenario(scenario_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<RunOutput, HarnessError> {
    let scenario = load_with_seed(scenario_path, seed)?;
    let output = simulate(&scenario)?;
    write(&out_dir.join("events.ndjson"), to_ndjson_string(output.world.log()))?;
    write_records(out_dir, &output.records)?;
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes") + "\n";
    write(&out_dir.join("summary.json"), summary)?;
    write(&out_dir.join("scenario.json"), scenario.to_json() + "\n")?;
    Ok(output)
}

/// Recomputes records from an event log and writes them (with plots) into
/// `out_dir`.
pub fn report(
    log_path: &Path,
    scenario_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<Vec<WeeklyRecord>, HarnessError> {
    let scenario = load_with_seed(scenario_path, seed)?;
    let file = fs::File::open(log_path).map_err(|e| HarnessError::io(log_path, e))?;
    let events = read_ndjson(BufReader::new(file)).map_err(|e| HarnessError::Log(e.to_string()))?;
    let records = replay(&scenario, &events)?;
    write_records(out_dir, &records)?;
    Ok(records)
}

/// Reads `records.json` and writes the charts into `out_dir`.
pub fn plot(records_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let text = fs::read_to_string(records_path).map_err(|e| HarnessError::io(records_path, e))?;
    let records: Vec<WeeklyRecord> = serde_json::from_str(&text).map_err(|e| HarnessError::Records(e.to_string()))?;
    if records.is_empty() {
        return Err(HarnessError::Records("no records to plot".into()));
    }
    write_plots(out_dir, &records)
}

/// Loads and validates a scenario file, including keyword expansion.
pub fn validate(scenario_path: &Path) -> Result<Scenario, HarnessError> {
    Scenario::load(scenario_path)
}
