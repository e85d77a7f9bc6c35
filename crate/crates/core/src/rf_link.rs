//! Link-budget core for the reader→tag (forward) and tag→reader (reverse)
//! paths of a UHF backscatter link.
//!
//! The forward link delivers
//!
//! ```text
//! P_ic = P_t * G_tag * G_reader * tau * (lambda / (4*pi*d))^2
//! ```
//!
//! at the tag chip, and inverting for the distance at which `P_ic` meets a
//! given chip sensitivity gives the maximum read range
//!
//! ```text
//! d = (lambda / (4*pi)) * sqrt(P_t * G_tag * G_reader * tau / P_min)
//! ```
//!
//! The reverse link is the symmetric radar-style chain: the backscattered
//! reply traverses the same path gain twice, so reader-side power falls as
//! `1/d^4` and doubling the distance costs `40*log10(2) ≈ 12.04 dB`.
//!
//! All functions are pure over immutable value types and safe to call from
//! any number of threads.

use std::f64::consts::PI;

use crate::error::ModelError;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Regulatory cap on reader transmit power, watts.
pub const TRANSMIT_POWER_CAP_W: f64 = 1.0;

/// Lower edge of the accepted UHF RFID carrier band, Hz.
pub const BAND_MIN_HZ: f64 = 860e6;

/// Upper edge of the accepted UHF RFID carrier band, Hz.
pub const BAND_MAX_HZ: f64 = 960e6;

/// Default tag antenna gain in dBi (half-wave dipole). The prototype tag
/// antenna is not characterized, so this is an overridable default.
pub const DEFAULT_TAG_GAIN_DBI: f64 = 2.15;

// ---------------------------------------------------------------------------
// dB / linear conversions
// ---------------------------------------------------------------------------

/// Convert a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Convert a power in watts to dBm.
///
/// Errors on non-positive input; dBm is undefined there.
pub fn watts_to_dbm(watts: f64) -> Result<f64, ModelError> {
    ModelError::expect_positive("power_w", watts)?;
    Ok(10.0 * (watts / 1e-3).log10())
}

/// Convert an antenna gain in dBi to its linear form.
pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

/// Free-space path loss in dB at the given distance and wavelength:
/// `FSPL = 20*log10(4*pi*d / lambda)`.
pub fn free_space_path_loss_db(distance_m: f64, wavelength_m: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m / wavelength_m).log10()
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

/// Reader-side RF parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReaderProfile {
    /// Transmit power in watts.
    pub transmit_power_w: f64,
    /// Reader antenna gain, linear.
    pub antenna_gain: f64,
    /// Reader antenna gain in dBi, kept alongside the linear form.
    pub antenna_gain_dbi: f64,
    /// Carrier frequency in Hz.
    pub carrier_frequency_hz: f64,
}

impl ReaderProfile {
    /// Validated constructor. Transmit power must be positive and within
    /// the 1 W regulatory cap; the carrier must sit in the UHF RFID band.
    pub fn new(
        transmit_power_w: f64,
        antenna_gain_dbi: f64,
        carrier_frequency_hz: f64,
    ) -> Result<Self, ModelError> {
        Self::with_over_limit(
            transmit_power_w,
            antenna_gain_dbi,
            carrier_frequency_hz,
            false,
        )
    }

    /// Like [`ReaderProfile::new`] but with an explicit escape hatch for
    /// transmit powers above the regulatory cap.
    pub fn with_over_limit(
        transmit_power_w: f64,
        antenna_gain_dbi: f64,
        carrier_frequency_hz: f64,
        allow_over_limit: bool,
    ) -> Result<Self, ModelError> {
        ModelError::expect_positive("transmit_power_w", transmit_power_w)?;
        if transmit_power_w > TRANSMIT_POWER_CAP_W && !allow_over_limit {
            return Err(ModelError::OverPowerLimit {
                watts: transmit_power_w,
            });
        }
        if !(BAND_MIN_HZ..=BAND_MAX_HZ).contains(&carrier_frequency_hz) {
            return Err(ModelError::OutOfRange {
                name: "carrier_frequency_hz",
                value: carrier_frequency_hz,
                min: BAND_MIN_HZ,
                max: BAND_MAX_HZ,
            });
        }
        Ok(Self {
            transmit_power_w,
            antenna_gain: dbi_to_linear(antenna_gain_dbi),
            antenna_gain_dbi,
            carrier_frequency_hz,
        })
    }

    /// Carrier wavelength in meters, derived from the carrier frequency.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_frequency_hz
    }
}

/// Tag-side RF parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TagRfProfile {
    /// Tag antenna gain, linear.
    pub antenna_gain: f64,
    /// Tag antenna gain in dBi, kept alongside the linear form.
    pub antenna_gain_dbi: f64,
    /// Fraction of incident power transferred across the antenna-chip
    /// impedance boundary, in [0, 1].
    pub transmission_coefficient: f64,
    /// Minimum RF power at which the chip wakes with no external supply, W.
    pub passive_sensitivity_w: f64,
    /// Minimum RF power at which the chip wakes when externally supplied, W.
    pub assisted_sensitivity_w: f64,
}

impl TagRfProfile {
    pub fn new(
        antenna_gain_dbi: f64,
        transmission_coefficient: f64,
        passive_sensitivity_w: f64,
        assisted_sensitivity_w: f64,
    ) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&transmission_coefficient) {
            return Err(ModelError::OutOfRange {
                name: "transmission_coefficient",
                value: transmission_coefficient,
                min: 0.0,
                max: 1.0,
            });
        }
        ModelError::expect_positive("passive_sensitivity_w", passive_sensitivity_w)?;
        ModelError::expect_positive("assisted_sensitivity_w", assisted_sensitivity_w)?;
        if assisted_sensitivity_w > passive_sensitivity_w {
            return Err(ModelError::SensitivityOrder {
                assisted_w: assisted_sensitivity_w,
                passive_w: passive_sensitivity_w,
            });
        }
        Ok(Self {
            antenna_gain: dbi_to_linear(antenna_gain_dbi),
            antenna_gain_dbi,
            transmission_coefficient,
            passive_sensitivity_w,
            assisted_sensitivity_w,
        })
    }
}

// ---------------------------------------------------------------------------
// Forward link
// ---------------------------------------------------------------------------

/// Power delivered to the tag chip at a given distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    /// Received power at the chip, watts.
    pub received_power_w: f64,
    /// The same power in dBm (negative infinity for zero coupling).
    pub received_power_dbm: f64,
    /// Reader-tag separation, meters.
    pub distance_m: f64,
}

/// Forward-link received power at the tag chip:
/// `P_ic = P_t * G_tag * G_reader * tau * (lambda / (4*pi*d))^2`.
pub fn forward_link_power(
    reader: &ReaderProfile,
    tag: &TagRfProfile,
    distance_m: f64,
) -> Result<LinkResult, ModelError> {
    ModelError::expect_positive("distance_m", distance_m)?;
    let spreading = reader.wavelength_m() / (4.0 * PI * distance_m);
    let received_power_w = reader.transmit_power_w
        * tag.antenna_gain
        * reader.antenna_gain
        * tag.transmission_coefficient
        * spreading
        * spreading;
    Ok(LinkResult {
        received_power_w,
        received_power_dbm: 10.0 * (received_power_w / 1e-3).log10(),
        distance_m,
    })
}

// ---------------------------------------------------------------------------
// Read range
// ---------------------------------------------------------------------------

/// Maximum distance at which a power threshold is still met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReadRange {
    /// The threshold is met out to this distance in meters.
    Reachable(f64),
    /// No distance meets the threshold (zero antenna-chip coupling).
    Unreachable,
}

impl ReadRange {
    pub fn distance_m(&self) -> Option<f64> {
        match self {
            ReadRange::Reachable(d) => Some(*d),
            ReadRange::Unreachable => None,
        }
    }
}

/// Maximum read range for a minimum chip power:
/// `d = (lambda / (4*pi)) * sqrt(P_t * G_tag * G_reader * tau / P_min)`.
///
/// A zero transmission coefficient yields [`ReadRange::Unreachable`]
/// rather than an error.
pub fn max_read_range(
    reader: &ReaderProfile,
    tag: &TagRfProfile,
    min_ic_power_w: f64,
) -> Result<ReadRange, ModelError> {
    ModelError::expect_positive("min_ic_power_w", min_ic_power_w)?;
    if tag.transmission_coefficient == 0.0 {
        return Ok(ReadRange::Unreachable);
    }
    let numerator = reader.transmit_power_w
        * tag.antenna_gain
        * reader.antenna_gain
        * tag.transmission_coefficient;
    let distance = reader.wavelength_m() / (4.0 * PI) * (numerator / min_ic_power_w).sqrt();
    Ok(ReadRange::Reachable(distance))
}

// ---------------------------------------------------------------------------
// Reverse link
// ---------------------------------------------------------------------------

/// Reader-side RSSI in dBm of the tag's backscattered reply.
///
/// Symmetric-path radar chain: the carrier reaches the tag through the
/// forward budget, is reflected with the backscatter gain `b`, and returns
/// through the same path gain, so
///
/// ```text
/// P_rx = P_t * (G_reader * G_tag)^2 * tau^2 * b * (lambda / (4*pi*d))^4
/// ```
///
/// Zero coupling returns negative infinity.
pub fn reverse_link_rssi(
    reader: &ReaderProfile,
    tag: &TagRfProfile,
    distance_m: f64,
    backscatter_gain: f64,
) -> Result<f64, ModelError> {
    ModelError::expect_positive("distance_m", distance_m)?;
    let gain_in_range = backscatter_gain > 0.0 && backscatter_gain <= 1.0;
    if !gain_in_range {
        return Err(ModelError::OutOfRange {
            name: "backscatter_gain",
            value: backscatter_gain,
            min: 0.0,
            max: 1.0,
        });
    }
    let spreading = reader.wavelength_m() / (4.0 * PI * distance_m);
    let one_way = reader.antenna_gain
        * tag.antenna_gain
        * tag.transmission_coefficient
        * spreading
        * spreading;
    let received_w = reader.transmit_power_w * one_way * one_way * backscatter_gain;
    Ok(10.0 * (received_w / 1e-3).log10())
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn reader_915() -> ReaderProfile {
        ReaderProfile::new(1.0, 8.5, 915e6).unwrap()
    }

    fn tag_matched() -> TagRfProfile {
        TagRfProfile::new(2.15, 1.0, dbm_to_watts(-9.0), dbm_to_watts(-23.0)).unwrap()
    }

    #[test]
    fn dbm_zero_is_one_milliwatt() {
        assert_eq!(dbm_to_watts(0.0), 1.0e-3);
    }

    #[test]
    fn dbm_thirty_is_one_watt() {
        assert!(approx_eq(dbm_to_watts(30.0), 1.0, 1e-15));
    }

    #[test]
    fn dbm_minus_23() {
        // 1e-3 * 10^(-2.3), evaluated by hand in the dB domain.
        assert!(approx_eq(dbm_to_watts(-23.0), 5.0119e-6, 1e-9));
    }

    #[test]
    fn watts_to_dbm_rejects_non_positive() {
        assert!(watts_to_dbm(0.0).is_err());
        assert!(watts_to_dbm(-1.0).is_err());
    }

    #[test]
    fn dbm_conversions_invert() {
        for dbm in [-120.0, -23.0, 0.0, 17.0, 30.0] {
            let back = watts_to_dbm(dbm_to_watts(dbm)).unwrap();
            assert!(
                approx_eq(back, dbm, 1e-12 * dbm.abs().max(1.0)),
                "round trip at {dbm} dBm gave {back}"
            );
        }
    }

    #[test]
    fn forward_link_at_one_meter() {
        // Independent dB-domain sum: 30 + 8.5 + 2.15 - FSPL(1 m).
        let reader = reader_915();
        let fspl = free_space_path_loss_db(1.0, reader.wavelength_m());
        let oracle_dbm = 30.0 + 8.5 + 2.15 - fspl;
        let got = forward_link_power(&reader, &tag_matched(), 1.0).unwrap();
        assert!(approx_eq(got.received_power_dbm, 8.97, 0.01), "{got:?}");
        assert!(approx_eq(got.received_power_dbm, oracle_dbm, 1e-9));
    }

    #[test]
    fn forward_link_at_five_meters() {
        let reader = reader_915();
        let fspl = free_space_path_loss_db(5.0, reader.wavelength_m());
        assert!(approx_eq(fspl, 45.66, 0.01), "FSPL(5 m) = {fspl}");
        let got = forward_link_power(&reader, &tag_matched(), 5.0).unwrap();
        assert!(approx_eq(got.received_power_dbm, -5.01, 0.01), "{got:?}");
    }

    #[test]
    fn forward_link_zero_coupling_gives_zero_watts() {
        let tag = TagRfProfile::new(2.15, 0.0, 1e-4, 1e-5).unwrap();
        let got = forward_link_power(&reader_915(), &tag, 1.0).unwrap();
        assert_eq!(got.received_power_w, 0.0);
        assert_eq!(got.received_power_dbm, f64::NEG_INFINITY);
    }

    #[test]
    fn forward_link_rejects_non_positive_distance() {
        assert!(forward_link_power(&reader_915(), &tag_matched(), 0.0).is_err());
        assert!(forward_link_power(&reader_915(), &tag_matched(), -2.0).is_err());
    }

    #[test]
    fn link_result_dbm_matches_definition() {
        let got = forward_link_power(&reader_915(), &tag_matched(), 3.7).unwrap();
        let expected = 10.0 * (got.received_power_w / 1e-3).log10();
        assert!(approx_eq(
            got.received_power_dbm,
            expected,
            1e-12 * expected.abs()
        ));
    }

    #[test]
    fn theoretical_range_at_minus_23_dbm() {
        let range = max_read_range(&reader_915(), &tag_matched(), dbm_to_watts(-23.0))
            .unwrap()
            .distance_m()
            .unwrap();
        assert!(approx_eq(range, 39.69, 0.05), "range = {range}");
        // "tens of meters" territory for a 1 W reader.
        assert!(range > 10.0);
    }

    #[test]
    fn range_at_minus_9_dbm() {
        let range = max_read_range(&reader_915(), &tag_matched(), dbm_to_watts(-9.0))
            .unwrap()
            .distance_m()
            .unwrap();
        assert!(approx_eq(range, 7.92, 0.02), "range = {range}");
    }

    #[test]
    fn sensitivity_gain_of_14_db_is_5x_range() {
        // A 14 dB sensitivity improvement is a factor 25.1 in power, hence
        // sqrt(25.1) ≈ 5.01 in range.
        let reader = reader_915();
        let tag = tag_matched();
        let r_assisted = max_read_range(&reader, &tag, dbm_to_watts(-23.0))
            .unwrap()
            .distance_m()
            .unwrap();
        let r_passive = max_read_range(&reader, &tag, dbm_to_watts(-9.0))
            .unwrap()
            .distance_m()
            .unwrap();
        assert!(approx_eq(r_assisted / r_passive, 5.01, 0.01));
    }

    #[test]
    fn range_zero_coupling_is_unreachable() {
        let tag = TagRfProfile::new(2.15, 0.0, 1e-4, 1e-5).unwrap();
        let range = max_read_range(&reader_915(), &tag, 1e-5).unwrap();
        assert_eq!(range, ReadRange::Unreachable);
    }

    #[test]
    fn range_rejects_non_positive_threshold() {
        assert!(max_read_range(&reader_915(), &tag_matched(), 0.0).is_err());
    }

    #[test]
    fn range_roundtrips_through_forward_link() {
        let reader = reader_915();
        let tag = tag_matched();
        for min_dbm in [-30.0, -23.0, -9.0, 0.0] {
            let min_w = dbm_to_watts(min_dbm);
            let d = max_read_range(&reader, &tag, min_w)
                .unwrap()
                .distance_m()
                .unwrap();
            let back = forward_link_power(&reader, &tag, d)
                .unwrap()
                .received_power_w;
            assert!(
                (back - min_w).abs() <= 1e-9 * min_w,
                "forward power at range for {min_dbm} dBm came back as {back} W"
            );
        }
    }

    #[test]
    fn reverse_rssi_matches_db_chain_sum() {
        // dB-domain chain: 30 dBm + 2*(8.5 + 2.15) dB - 2*FSPL(1 m).
        let reader = reader_915();
        let fspl = free_space_path_loss_db(1.0, reader.wavelength_m());
        let oracle = 30.0 + 2.0 * (8.5 + 2.15) - 2.0 * fspl;
        let got = reverse_link_rssi(&reader, &tag_matched(), 1.0, 1.0).unwrap();
        assert!(approx_eq(got, oracle, 0.05), "got {got}, oracle {oracle}");
        assert!(approx_eq(got, -12.05, 0.05), "got {got}");
    }

    #[test]
    fn reverse_rssi_doubling_distance_costs_12_db() {
        let reader = reader_915();
        let tag = tag_matched();
        let near = reverse_link_rssi(&reader, &tag, 1.0, 1.0).unwrap();
        let far = reverse_link_rssi(&reader, &tag, 2.0, 1.0).unwrap();
        let expected = 40.0 * 2f64.log10();
        assert!(
            approx_eq(near - far, expected, 1e-9),
            "drop = {}",
            near - far
        );
    }

    #[test]
    fn reverse_rssi_half_backscatter_gain_costs_3_db() {
        let reader = reader_915();
        let tag = tag_matched();
        let full = reverse_link_rssi(&reader, &tag, 1.5, 1.0).unwrap();
        let half = reverse_link_rssi(&reader, &tag, 1.5, 0.5).unwrap();
        assert!(approx_eq(full - half, 3.01, 0.01));
    }

    #[test]
    fn reverse_rssi_rejects_bad_backscatter_gain() {
        let reader = reader_915();
        let tag = tag_matched();
        assert!(reverse_link_rssi(&reader, &tag, 1.0, 0.0).is_err());
        assert!(reverse_link_rssi(&reader, &tag, 1.0, 1.5).is_err());
    }

    #[test]
    fn reader_profile_enforces_power_cap() {
        assert!(ReaderProfile::new(1.5, 8.5, 915e6).is_err());
        assert!(ReaderProfile::with_over_limit(1.5, 8.5, 915e6, true).is_ok());
        assert!(ReaderProfile::new(0.0, 8.5, 915e6).is_err());
    }

    #[test]
    fn reader_profile_enforces_band() {
        assert!(ReaderProfile::new(1.0, 8.5, 433e6).is_err());
        assert!(ReaderProfile::new(1.0, 8.5, 2.4e9).is_err());
        assert!(ReaderProfile::new(1.0, 8.5, 860e6).is_ok());
        assert!(ReaderProfile::new(1.0, 8.5, 960e6).is_ok());
    }

    #[test]
    fn wavelength_is_derived() {
        let reader = reader_915();
        assert!(approx_eq(reader.wavelength_m(), 0.32764, 1e-5));
    }

    #[test]
    fn tag_profile_enforces_invariants() {
        assert!(TagRfProfile::new(2.15, 1.2, 1e-4, 1e-5).is_err());
        assert!(TagRfProfile::new(2.15, -0.1, 1e-4, 1e-5).is_err());
        // Assisted threshold above passive is rejected.
        assert!(TagRfProfile::new(2.15, 1.0, 1e-5, 1e-4).is_err());
        assert!(TagRfProfile::new(2.15, 1.0, 1e-4, 1e-4).is_ok());
    }
}
