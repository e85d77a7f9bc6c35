//! The deterministic trace CSV schema.
//!
//! Header `time_index,tag_id,rssi_dbm,read_success,mode`, one row per
//! sample, floats at four decimal places, rows ordered by time index then
//! tag id. Emission is byte-stable for a given trace, and a written file
//! re-parses to the trace at that precision.

use pvtag_core::inventory_sim::{RssiSample, RssiTrace};
use pvtag_core::power_model::PowerMode;

use crate::error::CliError;

pub const TRACE_HEADER: &str = "time_index,tag_id,rssi_dbm,read_success,mode";

/// Render a trace as CSV text.
pub fn format_trace(trace: &RssiTrace) -> String {
    let mut rows: Vec<&RssiSample> = trace.samples.iter().collect();
    rows.sort_by(|a, b| (a.time_index, a.tag_id.as_str()).cmp(&(b.time_index, b.tag_id.as_str())));
    let mut out = String::with_capacity(rows.len() * 40 + TRACE_HEADER.len() + 1);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in rows {
        out.push_str(&format!(
            "{},{},{:.4},{},{}\n",
            s.time_index,
            s.tag_id,
            s.rssi_dbm,
            s.read_success,
            s.mode.as_str()
        ));
    }
    out
}

fn parse_mode(text: &str) -> Option<PowerMode> {
    match text {
        "off" => Some(PowerMode::Off),
        "passive" => Some(PowerMode::Passive),
        "assisted" => Some(PowerMode::Assisted),
        "sensor_active" => Some(PowerMode::SensorActive),
        _ => None,
    }
}

/// Parse CSV text back into a trace, enforcing the schema invariants:
/// finite RSSI and strictly increasing time indices per tag.
pub fn parse_trace(text: &str) -> Result<RssiTrace, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRACE_HEADER => {}
        other => {
            return Err(CliError::Validation(format!(
                "bad trace header {:?}, expected {:?}",
                other.unwrap_or(""),
                TRACE_HEADER
            )))
        }
    }

    let mut samples = Vec::new();
    let mut last_index: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    for (lineno, line) in lines.enumerate() {
        let row = lineno + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Validation(format!(
                "row {row}: expected 5 fields, found {}",
                fields.len()
            )));
        }
        let time_index: u32 = fields[0].parse().map_err(|_| {
            CliError::Validation(format!("row {row}: bad time_index {:?}", fields[0]))
        })?;
        let tag_id = fields[1].to_string();
        let rssi_dbm: f64 = fields[2].parse().map_err(|_| {
            CliError::Validation(format!("row {row}: bad rssi_dbm {:?}", fields[2]))
        })?;
        if !rssi_dbm.is_finite() {
            return Err(CliError::Validation(format!(
                "row {row}: rssi_dbm must be finite"
            )));
        }
        let read_success: bool = fields[3].parse().map_err(|_| {
            CliError::Validation(format!("row {row}: bad read_success {:?}", fields[3]))
        })?;
        let mode = parse_mode(fields[4])
            .ok_or_else(|| CliError::Validation(format!("row {row}: bad mode {:?}", fields[4])))?;

        if let Some(previous) = last_index.get(&tag_id) {
            if time_index <= *previous {
                return Err(CliError::Validation(format!(
                    "row {row}: time_index {time_index} does not increase for tag `{tag_id}`"
                )));
            }
        }
        last_index.insert(tag_id.clone(), time_index);

        samples.push(RssiSample {
            time_index,
            tag_id,
            rssi_dbm,
            read_success,
            mode,
        });
    }
    Ok(RssiTrace { samples })
}
