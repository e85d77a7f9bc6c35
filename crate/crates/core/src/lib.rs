//! Engineering library for photovoltaic-assisted backscatter tags.
//!
//! The layers build on each other:
//!
//! - [`rf_link`] — pure link-budget math: forward received power, maximum
//!   read range, reverse-link RSSI, dB/linear conversions;
//! - [`harvester`] — flexible PV cell and mini-module output, bending
//!   derating, and PV-area sizing for a load;
//! - [`power_model`] — the tag power-state machine (off / passive /
//!   assisted / sensor-active) over instantaneous RF and PV power;
//! - [`inventory_sim`] — a deterministic slotted-ALOHA inventory simulator
//!   producing per-tag read counts and noisy RSSI traces;
//! - [`sensing_apps`] — temperature telemetry gating, accelerometer
//!   orientation decoding, and two-tag differential-RSSI activity
//!   detection.
//!
//! Everything is plain value types and pure functions; simulation runs are
//! deterministic per seed.

pub mod error;
pub mod harvester;
pub mod inventory_sim;
pub mod power_model;
pub mod rf_link;
pub mod sensing_apps;

pub use error::ModelError;
pub use harvester::{
    bending_factor, module_power, required_area_cm2, BendRadius, EnvClass, IlluminationEnv,
    ModuleOutput, PvCellSpec, PvModuleSpec,
};
pub use inventory_sim::{
    range_sweep, run_inventory, InventoryResult, RssiDisturbance, RssiSample, RssiTrace, Scenario,
    SweepPoint, TagPlacement,
};
pub use power_model::{
    effective_sensitivity, evaluate_state, Load, LoadProfile, PowerMode, SensitivityTarget,
    TagPowerState,
};
pub use rf_link::{
    dbm_to_watts, forward_link_power, max_read_range, reverse_link_rssi, watts_to_dbm, LinkResult,
    ReadRange, ReaderProfile, TagRfProfile,
};
pub use sensing_apps::{
    decode_orientation, detect_activity, detect_activity_report, simulate_telemetry,
    simulate_telemetry_with_step, ActivityEvent, DetectionReport, DetectorParams, Orientation,
    OrientationReading, TelemetryReading,
};
