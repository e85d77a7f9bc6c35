//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by constructors and operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A quantity that must be strictly positive was zero or negative.
    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// A quantity fell outside its allowed interval.
    #[error("{name} = {value} outside allowed range [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Transmit power above the regulatory cap without the override flag.
    #[error("transmit power {watts} W exceeds the 1 W regulatory cap (enable the over-limit override to exceed)")]
    OverPowerLimit { watts: f64 },

    /// Bend radius tighter than the tested minimum of 5 mm.
    #[error("bend radius {radius_mm} mm is below the 5 mm tested minimum")]
    BendRadiusBelowTested { radius_mm: f64 },

    /// External power never worsens the wake threshold, so the assisted
    /// sensitivity must not exceed the passive one.
    #[error(
        "assisted sensitivity {assisted_w} W must not exceed passive sensitivity {passive_w} W"
    )]
    SensitivityOrder { assisted_w: f64, passive_w: f64 },

    #[error("duplicate tag id `{0}`")]
    DuplicateTagId(String),

    #[error("unknown tag id `{wanted}`; valid ids: {}", .available.join(", "))]
    UnknownTagId {
        wanted: String,
        available: Vec<String>,
    },

    #[error("tag `{0}` declares no `temperature` load")]
    MissingTemperatureLoad(String),

    /// Calibration window too short to estimate a deviation, or longer
    /// than the aligned trace.
    #[error("calibration window {window} must be >= 2 and must not exceed the {aligned} aligned samples")]
    BadCalibrationWindow { window: usize, aligned: usize },
}

impl ModelError {
    /// Guard for strictly positive, finite quantities. NaN and infinities
    /// are rejected alongside zero and negatives.
    pub(crate) fn expect_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(ModelError::NonPositive { name, value })
        }
    }
}
