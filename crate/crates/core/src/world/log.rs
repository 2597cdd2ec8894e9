//! Newline-delimited JSON persistence of the interaction log.
//!
//! One [`InteractionEvent`] per line with fields in the fixed order
//! `tick, actor, subject, verb, object, attribute`.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::InteractionEvent;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: tick {tick} precedes previous tick {previous}")]
    Unordered { line: usize, tick: u64, previous: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_ndjson<W: Write>(mut out: W, events: &[InteractionEvent]) -> std::io::Result<()> {
    for event in events {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_ndjson_string(events: &[InteractionEvent]) -> String {
    let mut buf = Vec::new();
    write_ndjson(&mut buf, events).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses an event log, rejecting malformed lines and decreasing ticks.
/// Blank lines are skipped.
pub fn read_ndjson<R: BufRead>(input: R) -> Result<Vec<InteractionEvent>, LogError> {
    let mut events: Vec<InteractionEvent> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: InteractionEvent = serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(prev) = events.last() {
            if event.tick < prev.tick {
                return Err(LogError::Unordered {
                    line: line_no,
                    tick: event.tick,
                    previous: prev.tick,
                });
            }
        }
        events.push(event);
    }
    Ok(events)
}
