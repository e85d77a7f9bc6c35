//! Subcommand bodies. Every command is a thin adapter over the library
//! with fixed output formatting, so identical inputs print identical bytes.

use std::path::Path;

use pvtag_core::harvester::{required_area_cm2, BendRadius, EnvClass, IlluminationEnv, PvCellSpec};
use pvtag_core::inventory_sim::RssiTrace;
use pvtag_core::power_model::{effective_sensitivity, SensitivityTarget};
use pvtag_core::rf_link::{max_read_range, watts_to_dbm, ReadRange};
use pvtag_core::sensing_apps::{
    decode_orientation, detect_activity_report, DetectorParams, Orientation, STANDARD_GRAVITY_M_S2,
};
use pvtag_core::{run_inventory, ModelError};

use crate::error::CliError;
use crate::scenario_file::{dump_normalized, load_scenario};
use crate::trace_csv::{format_trace, parse_trace};

// ---------------------------------------------------------------------------
// range
// ---------------------------------------------------------------------------

pub fn cmd_range(scenario_path: &Path, tag_id: &str, dump: bool) -> Result<(), CliError> {
    let (scenario, file) = load_scenario(scenario_path)?;
    if dump {
        print!("{}", dump_normalized(&file)?);
        return Ok(());
    }
    let tag = scenario
        .tags
        .iter()
        .find(|t| t.id == tag_id)
        .ok_or_else(|| {
            CliError::Validation(
                ModelError::UnknownTagId {
                    wanted: tag_id.to_string(),
                    available: scenario.tags.iter().map(|t| t.id.clone()).collect(),
                }
                .to_string(),
            )
        })?;

    let passive_w = effective_sensitivity(SensitivityTarget::Passive, &tag.rf);
    let assisted_w = effective_sensitivity(SensitivityTarget::Assisted, &tag.rf);
    let passive = max_read_range(&scenario.reader, &tag.rf, passive_w)?;
    let assisted = max_read_range(&scenario.reader, &tag.rf, assisted_w)?;

    println!("tag `{tag_id}`");
    print_range_line("passive ", passive_w, passive)?;
    print_range_line("assisted", assisted_w, assisted)?;
    match (assisted.distance_m(), passive.distance_m()) {
        (Some(a), Some(p)) => println!("assisted/passive range ratio: {:.3}", a / p),
        _ => println!("assisted/passive range ratio: n/a (unreachable)"),
    }
    Ok(())
}

fn print_range_line(label: &str, sensitivity_w: f64, range: ReadRange) -> Result<(), CliError> {
    let dbm = watts_to_dbm(sensitivity_w)?;
    match range {
        ReadRange::Reachable(d) => {
            println!("  {label} sensitivity {dbm:7.2} dBm -> range {d:.3} m")
        }
        ReadRange::Unreachable => {
            println!("  {label} sensitivity {dbm:7.2} dBm -> unreachable (zero coupling)")
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// pv-size
// ---------------------------------------------------------------------------

pub fn cmd_pv_size(
    load_uw: f64,
    efficiency: f64,
    class: EnvClass,
    bend: BendRadius,
    irradiance_uw_cm2: Option<f64>,
) -> Result<(), CliError> {
    let env = match irradiance_uw_cm2 {
        Some(uw) => IlluminationEnv::with_irradiance(class, uw * 1e-6)?,
        None => match class {
            EnvClass::OutdoorSun => IlluminationEnv::outdoor_sun(),
            EnvClass::IndoorLit => IlluminationEnv::indoor_lit(),
        },
    };
    // Vmpp and per-cell area do not enter the sizing; placeholders keep the
    // cell spec valid.
    let cell = PvCellSpec::new(efficiency, 1.0, 1.0)?;
    let area_cm2 = required_area_cm2(load_uw * 1e-6, &cell, &env, bend)?;

    let bend_text = match bend {
        BendRadius::Flat => "flat".to_string(),
        BendRadius::Millimeters(mm) => format!("bend radius {mm} mm"),
    };
    println!(
        "load {:.3} uW, efficiency {:.2} %, {} at {:.2} uW/cm2, {}",
        load_uw,
        efficiency * 100.0,
        env.class.as_str(),
        env.irradiance_w_cm2 * 1e6,
        bend_text
    );
    println!(
        "required PV area: {:.6} cm2 = {:.6} mm2",
        area_cm2,
        area_cm2 * 100.0
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(scenario_path: &Path, out: Option<&Path>, dump: bool) -> Result<(), CliError> {
    let (scenario, file) = load_scenario(scenario_path)?;
    if dump {
        print!("{}", dump_normalized(&file)?);
        return Ok(());
    }
    let out = out.expect("clap requires --out unless --dump-normalized");
    let result = run_inventory(&scenario)?;
    let csv = format_trace(&result.trace);
    std::fs::write(out, &csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;

    println!(
        "wrote {} ({} samples, {} rounds, seed {})",
        out.display(),
        result.trace.samples.len(),
        scenario.rounds,
        scenario.seed
    );
    for (id, count) in &result.read_counts {
        println!("  {id}: {count} reads");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

pub struct DetectArgs<'a> {
    pub activity_path: &'a Path,
    pub reference_path: &'a Path,
    pub activity_tag: Option<&'a str>,
    pub reference_tag: Option<&'a str>,
    pub params: DetectorParams,
}

pub fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let activity = load_tag_trace(args.activity_path, args.activity_tag, "--activity-tag")?;
    let reference = load_tag_trace(args.reference_path, args.reference_tag, "--reference-tag")?;

    let report = match detect_activity_report(&activity, &reference, &args.params) {
        Ok(report) => report,
        Err(e @ ModelError::BadCalibrationWindow { .. }) => {
            return Err(CliError::Validation(e.to_string()))
        }
        Err(other) => return Err(other.into()),
    };

    if report.aligned_count == 0 {
        return Err(CliError::Validation(format!(
            "traces share no time indices: activity covers {}, reference covers {}",
            coverage(&activity),
            coverage(&reference)
        )));
    }

    println!(
        "aligned {} samples (activity {}, reference {})",
        report.aligned_count,
        activity.samples.iter().filter(|s| s.read_success).count(),
        reference.samples.iter().filter(|s| s.read_success).count()
    );
    println!(
        "calibration: mu = {:.4} dB, sigma = {:.4} dB (window {})",
        report.calibration_mean_db, report.calibration_sigma_db, args.params.calib_window
    );
    if report.events.is_empty() {
        println!("no events detected");
    } else {
        for (i, event) in report.events.iter().enumerate() {
            println!(
                "event {}: indices [{}, {}], peak deviation {:.4} dB",
                i + 1,
                event.start_index,
                event.end_index,
                event.peak_deviation_db
            );
        }
    }
    Ok(())
}

fn coverage(trace: &RssiTrace) -> String {
    let read: Vec<u32> = trace
        .samples
        .iter()
        .filter(|s| s.read_success)
        .map(|s| s.time_index)
        .collect();
    match (read.first(), read.last()) {
        (Some(first), Some(last)) => format!("{} read samples over [{first}, {last}]", read.len()),
        _ => "no read samples".to_string(),
    }
}

fn load_tag_trace(
    path: &Path,
    wanted_tag: Option<&str>,
    flag: &str,
) -> Result<RssiTrace, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let trace =
        parse_trace(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;

    let mut ids: Vec<String> = trace.samples.iter().map(|s| s.tag_id.clone()).collect();
    ids.sort();
    ids.dedup();

    match wanted_tag {
        Some(tag) => {
            if !ids.iter().any(|id| id == tag) {
                return Err(CliError::Validation(format!(
                    "{}: no samples for tag `{tag}`; tags present: {}",
                    path.display(),
                    ids.join(", ")
                )));
            }
            Ok(RssiTrace {
                samples: trace
                    .samples
                    .into_iter()
                    .filter(|s| s.tag_id == tag)
                    .collect(),
            })
        }
        None if ids.len() == 1 => Ok(trace),
        None => Err(CliError::Validation(format!(
            "{}: contains {} tags ({}); pick one with {flag}",
            path.display(),
            ids.len(),
            ids.join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// orient
// ---------------------------------------------------------------------------

pub fn cmd_orient(accel: [f64; 3], g_tolerance: f64, axis_dominance: f64) -> Result<(), CliError> {
    let reading = decode_orientation(accel, g_tolerance, axis_dominance);
    match reading.decoded {
        Orientation::Indeterminate => {
            let norm = accel.iter().map(|c| c * c).sum::<f64>().sqrt();
            let reason = if !norm.is_finite() {
                "acceleration components must be finite".to_string()
            } else if (norm - STANDARD_GRAVITY_M_S2).abs() > g_tolerance {
                format!(
                    "non-stationary: |a| = {norm:.2} m/s2 deviates from {STANDARD_GRAVITY_M_S2} m/s2 by more than {g_tolerance} m/s2"
                )
            } else {
                format!(
                    "no axis dominates (|ax| = {:.2}, |ay| = {:.2}, |az| = {:.2})",
                    accel[0].abs(),
                    accel[1].abs(),
                    accel[2].abs()
                )
            };
            println!("indeterminate: {reason}");
        }
        decoded => println!("{}", decoded.as_str()),
    }
    Ok(())
}
