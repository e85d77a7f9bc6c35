//! Application pipelines built on the harvester, power, and inventory
//! layers: temperature telemetry gating, accelerometer orientation
//! decoding, and two-tag differential-RSSI activity detection.

use std::collections::BTreeMap;

use crate::error::ModelError;
use crate::inventory_sim::{run_inventory, tag_link_state, RssiTrace, Scenario};
use crate::power_model::PowerMode;

// ---------------------------------------------------------------------------
// Defaults
// ---------------------------------------------------------------------------

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY_M_S2: f64 = 9.81;

/// Default stationarity tolerance on the acceleration norm, m/s².
pub const DEFAULT_G_TOLERANCE_M_S2: f64 = 0.5;

/// Default ratio the winning axis must hold over the runner-up.
pub const DEFAULT_AXIS_DOMINANCE: f64 = 1.5;

/// Default detection threshold multiplier.
pub const DEFAULT_K_SIGMA: f64 = 3.0;

/// Default minimum run length for an event, samples.
pub const DEFAULT_MIN_RUN: usize = 3;

/// Floor on the calibration deviation so a noise-free window cannot yield
/// a zero threshold, dB.
pub const DEFAULT_SIGMA_FLOOR_DB: f64 = 0.1;

/// Default samples used to calibrate the differential baseline.
pub const DEFAULT_CALIB_WINDOW: usize = 20;

/// Default temperature quantization step, °C.
pub const DEFAULT_TEMPERATURE_STEP_C: f64 = 0.25;

/// Load name the telemetry pipeline looks for.
pub const TEMPERATURE_LOAD_NAME: &str = "temperature";

// ---------------------------------------------------------------------------
// Orientation decoding
// ---------------------------------------------------------------------------

/// Decoded orientation of a stationary tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    XUp,
    XDown,
    YUp,
    YDown,
    ZUp,
    ZDown,
    Indeterminate,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::XUp => "x_up",
            Orientation::XDown => "x_down",
            Orientation::YUp => "y_up",
            Orientation::YDown => "y_down",
            Orientation::ZUp => "z_up",
            Orientation::ZDown => "z_down",
            Orientation::Indeterminate => "indeterminate",
        }
    }
}

/// An acceleration vector and what it decodes to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationReading {
    pub accel_m_s2: [f64; 3],
    pub decoded: Orientation,
}

/// Map a stationary acceleration vector to the axis gravity lies along.
///
/// A reading whose norm strays from 9.81 m/s² by more than `g_tolerance`
/// is non-stationary and decodes as indeterminate. Otherwise the axis
/// with the largest magnitude wins if it exceeds `axis_dominance` times
/// the runner-up; its sign picks up versus down. Ties are indeterminate.
pub fn decode_orientation(
    accel_m_s2: [f64; 3],
    g_tolerance_m_s2: f64,
    axis_dominance: f64,
) -> OrientationReading {
    let indeterminate = OrientationReading {
        accel_m_s2,
        decoded: Orientation::Indeterminate,
    };
    if accel_m_s2.iter().any(|c| !c.is_finite()) {
        return indeterminate;
    }
    let norm = accel_m_s2.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - STANDARD_GRAVITY_M_S2).abs() > g_tolerance_m_s2 {
        return indeterminate;
    }

    let magnitudes = [
        accel_m_s2[0].abs(),
        accel_m_s2[1].abs(),
        accel_m_s2[2].abs(),
    ];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| magnitudes[b].total_cmp(&magnitudes[a]));
    let (winner, runner_up) = (order[0], order[1]);
    let dominant = magnitudes[winner] > axis_dominance * magnitudes[runner_up];
    if !dominant {
        return indeterminate;
    }

    let up = accel_m_s2[winner] > 0.0;
    let decoded = match (winner, up) {
        (0, true) => Orientation::XUp,
        (0, false) => Orientation::XDown,
        (1, true) => Orientation::YUp,
        (1, false) => Orientation::YDown,
        (2, true) => Orientation::ZUp,
        _ => Orientation::ZDown,
    };
    OrientationReading {
        accel_m_s2,
        decoded,
    }
}

// ---------------------------------------------------------------------------
// Differential-RSSI activity detection
// ---------------------------------------------------------------------------

/// A detected activity window.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityEvent {
    /// Time index of the first deviating sample.
    pub start_index: u32,
    /// Time index of the last deviating sample.
    pub end_index: u32,
    /// Largest |delta - mu| inside the window, dB.
    pub peak_deviation_db: f64,
}

/// Detector tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Leading aligned samples used to estimate the baseline mean and
    /// deviation of the differential signal; at least 2.
    pub calib_window: usize,
    pub k_sigma: f64,
    pub min_run: usize,
    pub sigma_floor_db: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            calib_window: DEFAULT_CALIB_WINDOW,
            k_sigma: DEFAULT_K_SIGMA,
            min_run: DEFAULT_MIN_RUN,
            sigma_floor_db: DEFAULT_SIGMA_FLOOR_DB,
        }
    }
}

/// Events plus the calibration the detector settled on.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub events: Vec<ActivityEvent>,
    pub calibration_mean_db: f64,
    /// Sample deviation of the calibration window, before the floor.
    pub calibration_sigma_db: f64,
    /// Aligned sample count the detector actually scanned.
    pub aligned_count: usize,
}

/// Detect activity windows by comparing an activity tag against a
/// co-located reference tag.
///
/// Only successfully read samples carry reader-side RSSI; the traces are
/// aligned on the time indices where both tags were read and the rest are
/// dropped. The differential `delta_t = rssi_activity - rssi_reference`
/// is calibrated on the first `calib_window` aligned samples, and an
/// event is a maximal run of at least `min_run` consecutive aligned
/// samples with `|delta_t - mu| > k_sigma * max(sigma, sigma_floor)`.
/// Common-mode level shifts cancel in the difference.
pub fn detect_activity(
    activity: &RssiTrace,
    reference: &RssiTrace,
    params: &DetectorParams,
) -> Result<Vec<ActivityEvent>, ModelError> {
    detect_activity_report(activity, reference, params).map(|r| r.events)
}

/// [`detect_activity`] with the calibration exposed.
pub fn detect_activity_report(
    activity: &RssiTrace,
    reference: &RssiTrace,
    params: &DetectorParams,
) -> Result<DetectionReport, ModelError> {
    let read_rssi = |trace: &RssiTrace| -> BTreeMap<u32, f64> {
        trace
            .samples
            .iter()
            .filter(|s| s.read_success)
            .map(|s| (s.time_index, s.rssi_dbm))
            .collect()
    };
    let act = read_rssi(activity);
    let rf = read_rssi(reference);

    let aligned: Vec<(u32, f64)> = act
        .iter()
        .filter_map(|(t, a)| rf.get(t).map(|r| (*t, a - r)))
        .collect();
    if aligned.is_empty() {
        return Ok(DetectionReport {
            events: Vec::new(),
            calibration_mean_db: 0.0,
            calibration_sigma_db: 0.0,
            aligned_count: 0,
        });
    }
    if params.calib_window < 2 || params.calib_window > aligned.len() {
        return Err(ModelError::BadCalibrationWindow {
            window: params.calib_window,
            aligned: aligned.len(),
        });
    }

    let calib = &aligned[..params.calib_window];
    let mean = calib.iter().map(|(_, d)| d).sum::<f64>() / calib.len() as f64;
    let var = calib.iter().map(|(_, d)| (d - mean).powi(2)).sum::<f64>() / (calib.len() - 1) as f64;
    let sigma = var.sqrt();
    let threshold = params.k_sigma * sigma.max(params.sigma_floor_db);

    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=aligned.len() {
        let deviating = i < aligned.len() && (aligned[i].1 - mean).abs() > threshold;
        match (run_start, deviating) {
            (None, true) => run_start = Some(i),
            (Some(start), false) => {
                let len = i - start;
                if len >= params.min_run.max(1) {
                    let peak = aligned[start..i]
                        .iter()
                        .map(|(_, d)| (d - mean).abs())
                        .fold(0.0_f64, f64::max);
                    events.push(ActivityEvent {
                        start_index: aligned[start].0,
                        end_index: aligned[i - 1].0,
                        peak_deviation_db: peak,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }

    Ok(DetectionReport {
        events,
        calibration_mean_db: mean,
        calibration_sigma_db: sigma,
        aligned_count: aligned.len(),
    })
}

// ---------------------------------------------------------------------------
// Temperature telemetry
// ---------------------------------------------------------------------------

/// One telemetry slot: a quantized reading, or nothing if the tag could
/// not sense or was not read that round.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryReading {
    pub time_index: u32,
    pub temperature_c: Option<f64>,
}

/// Simulate wireless temperature telemetry with the default 0.25 °C step.
pub fn simulate_telemetry(
    scenario: &Scenario,
    tag_id: &str,
    true_temperature_c: &[f64],
) -> Result<Vec<TelemetryReading>, ModelError> {
    simulate_telemetry_with_step(
        scenario,
        tag_id,
        true_temperature_c,
        DEFAULT_TEMPERATURE_STEP_C,
    )
}

/// Simulate wireless temperature telemetry over the length of the true
/// temperature series (one inventory round per sample).
///
/// A reading is produced at index `t` exactly when the tag's power state
/// is sensor-active with the `temperature` load selected and the round's
/// inventory read the tag; readings are the true series quantized to
/// `step_c` (0 disables quantization).
pub fn simulate_telemetry_with_step(
    scenario: &Scenario,
    tag_id: &str,
    true_temperature_c: &[f64],
    step_c: f64,
) -> Result<Vec<TelemetryReading>, ModelError> {
    scenario.validate()?;
    let tag = scenario
        .tags
        .iter()
        .find(|t| t.id == tag_id)
        .ok_or_else(|| ModelError::UnknownTagId {
            wanted: tag_id.to_string(),
            available: scenario.tags.iter().map(|t| t.id.clone()).collect(),
        })?;
    if !tag.loads.declares(TEMPERATURE_LOAD_NAME) {
        return Err(ModelError::MissingTemperatureLoad(tag_id.to_string()));
    }

    let link = tag_link_state(&scenario.reader, &scenario.env, tag)?;
    let sensing = link.state.mode == PowerMode::SensorActive
        && link
            .state
            .active_loads
            .iter()
            .any(|l| l == TEMPERATURE_LOAD_NAME);

    let mut horizon = scenario.clone();
    horizon.rounds = true_temperature_c.len() as u32;
    let result = run_inventory(&horizon)?;
    let mut read_at = vec![false; true_temperature_c.len()];
    for sample in result.trace.for_tag(tag_id) {
        if sample.read_success {
            read_at[sample.time_index as usize] = true;
        }
    }

    Ok(true_temperature_c
        .iter()
        .enumerate()
        .map(|(t, &temperature)| TelemetryReading {
            time_index: t as u32,
            temperature_c: if sensing && read_at[t] {
                Some(quantize(temperature, step_c))
            } else {
                None
            },
        })
        .collect())
}

fn quantize(value: f64, step: f64) -> f64 {
    if step > 0.0 {
        (value / step).round() * step
    } else {
        value
    }
}

// ===========================================================================
// Tests
// ===========================================================================
