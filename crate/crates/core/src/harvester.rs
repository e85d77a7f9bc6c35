//! Flexible perovskite PV harvester model.
//!
//! Cells are abstracted to a conversion efficiency, a maximum-power-point
//! voltage, and an active area; a mini-module stacks cells in series (adds
//! voltage) and parallel (adds area). Output power is the constant-efficiency
//! product `eta * G * A`, derated by a bending factor when the module is
//! curved. The bending curve is anchored at the two measured points — no
//! loss at radii of 20 mm and above, 20 % relative loss at the 5 mm test
//! limit — with log-linear interpolation in radius between them.

use crate::error::ModelError;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Sanity ceiling on cell efficiency, above current perovskite records.
pub const MAX_CELL_EFFICIENCY: f64 = 0.35;

/// Bend radius at and above which no efficiency is lost, mm.
pub const BEND_NO_LOSS_MM: f64 = 20.0;

/// Tightest bend radius the test jig covers, mm.
pub const BEND_MIN_TESTED_MM: f64 = 5.0;

/// Relative efficiency retained at the tightest tested radius.
pub const BEND_FACTOR_AT_MIN: f64 = 0.80;

/// Default outdoor irradiance (1 Sun): 100 mW/cm².
pub const OUTDOOR_IRRADIANCE_W_CM2: f64 = 0.1;

/// Default irradiance underneath indoor light fixtures: 100 µW/cm².
pub const INDOOR_IRRADIANCE_W_CM2: f64 = 100e-6;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Curvature of a mounted module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BendRadius {
    /// No curvature.
    Flat,
    /// Cylindrical bend of the given radius, mm.
    Millimeters(f64),
}

/// A single PV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCellSpec {
    /// Conversion efficiency, fraction in (0, 0.35).
    pub efficiency: f64,
    /// Voltage at the maximum power point, volts.
    pub vmpp_v: f64,
    /// Active area, cm².
    pub active_area_cm2: f64,
}

impl PvCellSpec {
    pub fn new(efficiency: f64, vmpp_v: f64, active_area_cm2: f64) -> Result<Self, ModelError> {
        if !(efficiency > 0.0 && efficiency < MAX_CELL_EFFICIENCY) {
            return Err(ModelError::OutOfRange {
                name: "efficiency",
                value: efficiency,
                min: 0.0,
                max: MAX_CELL_EFFICIENCY,
            });
        }
        ModelError::expect_positive("vmpp_v", vmpp_v)?;
        ModelError::expect_positive("active_area_cm2", active_area_cm2)?;
        Ok(Self {
            efficiency,
            vmpp_v,
            active_area_cm2,
        })
    }
}

/// A mini-module of identical cells in a series/parallel arrangement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvModuleSpec {
    pub cell: PvCellSpec,
    /// Cells in series; sets the module voltage.
    pub series_count: u32,
    /// Series strings in parallel; sets the module area.
    pub parallel_count: u32,
    pub bend_radius: BendRadius,
}

impl PvModuleSpec {
    pub fn new(
        cell: PvCellSpec,
        series_count: u32,
        parallel_count: u32,
        bend_radius: BendRadius,
    ) -> Result<Self, ModelError> {
        if series_count == 0 {
            return Err(ModelError::NonPositive {
                name: "series_count",
                value: 0.0,
            });
        }
        if parallel_count == 0 {
            return Err(ModelError::NonPositive {
                name: "parallel_count",
                value: 0.0,
            });
        }
        // Reject untested radii up front so downstream power math can't fail.
        bending_factor(bend_radius)?;
        Ok(Self {
            cell,
            series_count,
            parallel_count,
            bend_radius,
        })
    }

    /// Module voltage at maximum power: the series stack of cell voltages.
    pub fn vmpp_v(&self) -> f64 {
        self.series_count as f64 * self.cell.vmpp_v
    }

    /// Total active area across all cells, cm².
    pub fn total_area_cm2(&self) -> f64 {
        (self.series_count as f64) * (self.parallel_count as f64) * self.cell.active_area_cm2
    }
}

/// Illumination environment a harvester sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvClass {
    OutdoorSun,
    IndoorLit,
}

impl EnvClass {
    /// Default irradiance for the class, W/cm².
    pub fn default_irradiance_w_cm2(&self) -> f64 {
        match self {
            EnvClass::OutdoorSun => OUTDOOR_IRRADIANCE_W_CM2,
            EnvClass::IndoorLit => INDOOR_IRRADIANCE_W_CM2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvClass::OutdoorSun => "outdoor_sun",
            EnvClass::IndoorLit => "indoor_lit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationEnv {
    /// Incident irradiance, W/cm².
    pub irradiance_w_cm2: f64,
    pub class: EnvClass,
}

impl IlluminationEnv {
    /// 1 Sun outdoors.
    pub fn outdoor_sun() -> Self {
        Self {
            irradiance_w_cm2: OUTDOOR_IRRADIANCE_W_CM2,
            class: EnvClass::OutdoorSun,
        }
    }

    /// Underneath indoor light fixtures.
    pub fn indoor_lit() -> Self {
        Self {
            irradiance_w_cm2: INDOOR_IRRADIANCE_W_CM2,
            class: EnvClass::IndoorLit,
        }
    }

    /// A class with an explicit irradiance override.
    pub fn with_irradiance(class: EnvClass, irradiance_w_cm2: f64) -> Result<Self, ModelError> {
        ModelError::expect_positive("irradiance_w_cm2", irradiance_w_cm2)?;
        Ok(Self {
            irradiance_w_cm2,
            class,
        })
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Relative efficiency retained at a bend radius.
///
/// 1.0 when flat or at radii of 20 mm and above, 0.80 at the 5 mm test
/// limit, and log-linear in radius between:
/// `f(r) = 0.8 + 0.2 * log2(r/5) / log2(20/5)`.
///
/// Radii below 5 mm sit outside the tested domain and are an error rather
/// than an extrapolation.
pub fn bending_factor(radius: BendRadius) -> Result<f64, ModelError> {
    match radius {
        BendRadius::Flat => Ok(1.0),
        BendRadius::Millimeters(r) => {
            if !r.is_finite() || r < BEND_MIN_TESTED_MM {
                return Err(ModelError::BendRadiusBelowTested { radius_mm: r });
            }
            if r >= BEND_NO_LOSS_MM {
                return Ok(1.0);
            }
            let span = (BEND_NO_LOSS_MM / BEND_MIN_TESTED_MM).log2();
            Ok(BEND_FACTOR_AT_MIN
                + (1.0 - BEND_FACTOR_AT_MIN) * (r / BEND_MIN_TESTED_MM).log2() / span)
        }
    }
}

/// Electrical output of a module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuleOutput {
    /// Output power at the maximum power point, watts.
    pub power_w: f64,
    /// Module voltage at the maximum power point, volts.
    pub vmpp_v: f64,
}

impl ModuleOutput {
    /// Output of an absent or dark harvester.
    pub const NONE: ModuleOutput = ModuleOutput {
        power_w: 0.0,
        vmpp_v: 0.0,
    };
}

/// Power and voltage a module delivers under an illumination environment:
/// `P = eta * G * A_total * bending_factor`, `V = series_count * Vmpp`.
pub fn module_power(module: &PvModuleSpec, env: &IlluminationEnv) -> ModuleOutput {
    let factor = bending_factor(module.bend_radius)
        .expect("bend radius is validated when the module is constructed");
    ModuleOutput {
        power_w: module.cell.efficiency * env.irradiance_w_cm2 * module.total_area_cm2() * factor,
        vmpp_v: module.vmpp_v(),
    }
}

/// Smallest cell area in cm² that covers a load under the given
/// illumination and bend: `A = P_load / (eta * G * bending_factor)`.
pub fn required_area_cm2(
    load_power_w: f64,
    cell: &PvCellSpec,
    env: &IlluminationEnv,
    bend: BendRadius,
) -> Result<f64, ModelError> {
    ModelError::expect_positive("load_power_w", load_power_w)?;
    let factor = bending_factor(bend)?;
    Ok(load_power_w / (cell.efficiency * env.irradiance_w_cm2 * factor))
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

    fn champion_cell() -> PvCellSpec {
        PvCellSpec::new(0.13, 0.88, 1.0).unwrap()
    }

    #[test]
    fn bending_flat_is_unity() {
        assert_eq!(bending_factor(BendRadius::Flat).unwrap(), 1.0);
    }

    #[test]
    fn bending_at_5_mm_is_exactly_080() {
        assert_eq!(bending_factor(BendRadius::Millimeters(5.0)).unwrap(), 0.80);
    }

    #[test]
    fn bending_at_10_mm_interpolates_to_090() {
        // 0.8 + 0.2 * log2(2) / log2(4) = 0.9, by hand.
        let f = bending_factor(BendRadius::Millimeters(10.0)).unwrap();
        assert!(approx_eq(f, 0.90, 1e-12), "f(10 mm) = {f}");
    }

    #[test]
    fn bending_at_and_above_20_mm_is_unity() {
        assert_eq!(bending_factor(BendRadius::Millimeters(20.0)).unwrap(), 1.0);
        assert_eq!(bending_factor(BendRadius::Millimeters(200.0)).unwrap(), 1.0);
    }

    #[test]
    fn bending_continuous_at_20_mm() {
        let below = bending_factor(BendRadius::Millimeters(20.0 - 1e-9)).unwrap();
        assert!(approx_eq(below, 1.0, 1e-9));
    }

    #[test]
    fn bending_below_tested_domain_errors() {
        assert!(bending_factor(BendRadius::Millimeters(4.9)).is_err());
        assert!(bending_factor(BendRadius::Millimeters(f64::NAN)).is_err());
    }

    #[test]
    fn single_cell_indoor_output() {
        // 0.13 * 100e-6 W/cm² * 1 cm² = 13 µW at the cell's 0.88 V.
        let module = PvModuleSpec::new(champion_cell(), 1, 1, BendRadius::Flat).unwrap();
        let out = module_power(&module, &IlluminationEnv::indoor_lit());
        assert!(approx_eq(out.power_w, 13e-6, 1e-12), "{out:?}");
        assert!(approx_eq(out.vmpp_v, 0.88, 1e-12));
    }

    #[test]
    fn six_series_module_voltage_clears_3_v() {
        let module = PvModuleSpec::new(champion_cell(), 6, 1, BendRadius::Flat).unwrap();
        let out = module_power(&module, &IlluminationEnv::indoor_lit());
        assert!(approx_eq(out.vmpp_v, 5.28, 1e-12));
        assert!(out.vmpp_v >= 3.0);
    }

    #[test]
    fn one_square_millimeter_outdoors() {
        // 0.13 * 0.1 W/cm² * 0.01 cm² = 130 µW.
        let cell = PvCellSpec::new(0.13, 0.88, 0.01).unwrap();
        let module = PvModuleSpec::new(cell, 1, 1, BendRadius::Flat).unwrap();
        let out = module_power(&module, &IlluminationEnv::outdoor_sun());
        assert!(approx_eq(out.power_w, 130e-6, 1e-12), "{out:?}");
    }

    #[test]
    fn area_for_15_uw_outdoors() {
        // 15e-6 / (0.13 * 0.1) = 1.1538e-3 cm², under a square millimeter.
        let area = required_area_cm2(
            15e-6,
            &champion_cell(),
            &IlluminationEnv::outdoor_sun(),
            BendRadius::Flat,
        )
        .unwrap();
        assert!(approx_eq(area, 1.1538e-3, 1e-6), "area = {area}");
        assert!(area * 100.0 < 1.0, "under 1 mm²");
    }

    #[test]
    fn area_for_350_uw_indoors() {
        // 350e-6 / (0.13 * 100e-6) = 26.92 cm².
        let area = required_area_cm2(
            350e-6,
            &champion_cell(),
            &IlluminationEnv::indoor_lit(),
            BendRadius::Flat,
        )
        .unwrap();
        assert!(approx_eq(area, 26.92, 0.01), "area = {area}");
    }

    #[test]
    fn area_rejects_non_positive_load() {
        let err = required_area_cm2(
            0.0,
            &champion_cell(),
            &IlluminationEnv::outdoor_sun(),
            BendRadius::Flat,
        );
        assert!(err.is_err());
    }

    #[test]
    fn bend_at_5mm_inflates_area_by_1_25() {
        let flat = required_area_cm2(
            15e-6,
            &champion_cell(),
            &IlluminationEnv::outdoor_sun(),
            BendRadius::Flat,
        )
        .unwrap();
        let bent = required_area_cm2(
            15e-6,
            &champion_cell(),
            &IlluminationEnv::outdoor_sun(),
            BendRadius::Millimeters(5.0),
        )
        .unwrap();
        assert!(approx_eq(bent / flat, 1.25, 1e-12));
    }

    #[test]
    fn cell_spec_enforces_bounds() {
        assert!(PvCellSpec::new(0.0, 0.88, 1.0).is_err());
        assert!(PvCellSpec::new(0.40, 0.88, 1.0).is_err());
        assert!(PvCellSpec::new(0.13, 0.0, 1.0).is_err());
        assert!(PvCellSpec::new(0.13, 0.88, -1.0).is_err());
    }

    #[test]
    fn module_spec_enforces_counts_and_radius() {
        assert!(PvModuleSpec::new(champion_cell(), 0, 1, BendRadius::Flat).is_err());
        assert!(PvModuleSpec::new(champion_cell(), 1, 0, BendRadius::Flat).is_err());
        assert!(PvModuleSpec::new(champion_cell(), 1, 1, BendRadius::Millimeters(3.0)).is_err());
    }

    #[test]
    fn env_defaults_match_classes() {
        assert_eq!(IlluminationEnv::outdoor_sun().irradiance_w_cm2, 0.1);
        assert_eq!(IlluminationEnv::indoor_lit().irradiance_w_cm2, 100e-6);
        assert!(IlluminationEnv::with_irradiance(EnvClass::IndoorLit, 0.0).is_err());
    }
}
