//! Tag energy state machine.
//!
//! Decides, from instantaneous RF input power and harvested PV power,
//! whether a tag is off, passive, battery-assisted, or running sensor
//! loads, and which loads it can afford. There is no storage element: the
//! decision is an instantaneous power balance.

use crate::error::ModelError;
use crate::harvester::ModuleOutput;
use crate::rf_link::TagRfProfile;

/// Default chip idle draw: around 10 µW depending on operation.
pub const DEFAULT_IC_IDLE_W: f64 = 10e-6;

/// Accepted envelope for any single draw: 1 µW to 10 mW.
pub const LOAD_DRAW_MIN_W: f64 = 1e-6;
pub const LOAD_DRAW_MAX_W: f64 = 10e-3;

/// A named auxiliary load with its power draw and supply-voltage floor.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub name: String,
    pub draw_w: f64,
    pub min_voltage_v: f64,
}

impl Load {
    pub fn new(
        name: impl Into<String>,
        draw_w: f64,
        min_voltage_v: f64,
    ) -> Result<Self, ModelError> {
        if !(LOAD_DRAW_MIN_W..=LOAD_DRAW_MAX_W).contains(&draw_w) {
            return Err(ModelError::OutOfRange {
                name: "draw_w",
                value: draw_w,
                min: LOAD_DRAW_MIN_W,
                max: LOAD_DRAW_MAX_W,
            });
        }
        ModelError::expect_positive("min_voltage_v", min_voltage_v)?;
        Ok(Self {
            name: name.into(),
            draw_w,
            min_voltage_v,
        })
    }
}

/// Chip idle draw plus the auxiliary loads a tag may run.
///
/// Declared order is the selection priority when harvested power cannot
/// cover every load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub ic_idle_w: f64,
    pub loads: Vec<Load>,
}

impl Default for LoadProfile {
    fn default() -> Self {
        Self {
            ic_idle_w: DEFAULT_IC_IDLE_W,
            loads: Vec::new(),
        }
    }
}

impl LoadProfile {
    pub fn new(ic_idle_w: f64, loads: Vec<Load>) -> Result<Self, ModelError> {
        if !(LOAD_DRAW_MIN_W..=LOAD_DRAW_MAX_W).contains(&ic_idle_w) {
            return Err(ModelError::OutOfRange {
                name: "ic_idle_w",
                value: ic_idle_w,
                min: LOAD_DRAW_MIN_W,
                max: LOAD_DRAW_MAX_W,
            });
        }
        Ok(Self { ic_idle_w, loads })
    }

    /// Whether a load with the given name is declared.
    pub fn declares(&self, name: &str) -> bool {
        self.loads.iter().any(|l| l.name == name)
    }
}

/// Operating mode, ordered by capability. More available power never
/// yields a lower mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PowerMode {
    Off,
    Passive,
    Assisted,
    SensorActive,
}

impl PowerMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PowerMode::Off => "off",
            PowerMode::Passive => "passive",
            PowerMode::Assisted => "assisted",
            PowerMode::SensorActive => "sensor_active",
        }
    }
}

/// Resolved power state of a tag.
#[derive(Debug, Clone, PartialEq)]
pub struct TagPowerState {
    pub mode: PowerMode,
    /// Names of the auxiliary loads running, in priority order.
    pub active_loads: Vec<String>,
    /// Harvested power left after everything consumed, watts.
    pub margin_w: f64,
}

impl TagPowerState {
    /// Harvested power actually consumed, watts.
    pub fn consumed_w(&self, pv: &ModuleOutput) -> f64 {
        pv.power_w.max(0.0) - self.margin_w
    }
}

/// Decide a tag's operating mode from instantaneous RF and PV power.
///
/// - off: RF below the passive threshold and no assisted path (PV cannot
///   run the chip, or RF below even the assisted threshold);
/// - passive: RF wakes the chip unassisted, harvested power insufficient
///   to take over;
/// - assisted: PV covers the chip idle draw and RF clears the assisted
///   threshold;
/// - sensor_active: additionally, the PV surplus covers one or more loads
///   whose voltage floors the module satisfies.
///
/// Loads are taken in declared priority order while the surplus lasts: a
/// load the module voltage cannot supply is skipped outright, and
/// selection stops at the first affordable-by-priority load the surplus
/// cannot cover. Stopping (rather than scavenging further down the list)
/// keeps the selected set monotone in available power.
pub fn evaluate_state(
    rf_in_w: f64,
    pv: ModuleOutput,
    rf: &TagRfProfile,
    loads: &LoadProfile,
) -> TagPowerState {
    let rf_in = rf_in_w.max(0.0);
    let pv_power = pv.power_w.max(0.0);
    let rf_clears_assisted = rf_in >= rf.assisted_sensitivity_w;
    let rf_clears_passive = rf_in >= rf.passive_sensitivity_w;
    let pv_runs_chip = pv_power >= loads.ic_idle_w;

    if rf_clears_assisted && pv_runs_chip {
        let mut budget = pv_power - loads.ic_idle_w;
        let mut active = Vec::new();
        for load in &loads.loads {
            if pv.vmpp_v < load.min_voltage_v {
                continue;
            }
            if load.draw_w <= budget {
                budget -= load.draw_w;
                active.push(load.name.clone());
            } else {
                break;
            }
        }
        if active.is_empty() {
            TagPowerState {
                mode: PowerMode::Assisted,
                active_loads: active,
                margin_w: budget,
            }
        } else {
            TagPowerState {
                mode: PowerMode::SensorActive,
                active_loads: active,
                margin_w: budget,
            }
        }
    } else if rf_clears_passive {
        // RF alone wakes the chip; harvested power goes unused.
        TagPowerState {
            mode: PowerMode::Passive,
            active_loads: Vec::new(),
            margin_w: pv_power,
        }
    } else {
        TagPowerState {
            mode: PowerMode::Off,
            active_loads: Vec::new(),
            margin_w: pv_power,
        }
    }
}

/// Which wake threshold a mode target requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityTarget {
    Passive,
    Assisted,
}

/// RF power the forward link must deliver for the target mode. Feeding
/// the result to `rf_link::max_read_range` gives the mode's read range.
pub fn effective_sensitivity(target: SensitivityTarget, rf: &TagRfProfile) -> f64 {
    match target {
        SensitivityTarget::Passive => rf.passive_sensitivity_w,
        SensitivityTarget::Assisted => rf.assisted_sensitivity_w,
    }
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rf_link::dbm_to_watts;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rf_profile() -> TagRfProfile {
        TagRfProfile::new(2.15, 1.0, dbm_to_watts(-9.0), dbm_to_watts(-23.0)).unwrap()
    }

    fn sensor_loads() -> LoadProfile {
        LoadProfile::new(
            10e-6,
            vec![
                Load::new("temperature", 15e-6, 0.5).unwrap(),
                Load::new("orientation", 350e-6, 3.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn strong_rf_alone_is_passive() {
        let state = evaluate_state(
            dbm_to_watts(-5.0),
            ModuleOutput::NONE,
            &rf_profile(),
            &LoadProfile::default(),
        );
        assert_eq!(state.mode, PowerMode::Passive);
        assert!(state.active_loads.is_empty());
    }

    #[test]
    fn weak_rf_with_small_pv_is_assisted_without_loads() {
        // -20 dBm sits between the -9 dBm passive and -23 dBm assisted
        // thresholds; 13 µW covers the 10 µW idle draw but not the 15 µW
        // temperature load on top.
        let pv = ModuleOutput {
            power_w: 13e-6,
            vmpp_v: 0.88,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &sensor_loads());
        assert_eq!(state.mode, PowerMode::Assisted);
        assert!(state.active_loads.is_empty());
        assert!(approx_eq(state.margin_w, 3e-6, 1e-12));
    }

    #[test]
    fn ample_pv_activates_the_orientation_suite() {
        // 400 µW >= 10 + 350 µW and 5.28 V >= 3 V.
        let pv = ModuleOutput {
            power_w: 400e-6,
            vmpp_v: 5.28,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &sensor_loads());
        assert_eq!(state.mode, PowerMode::SensorActive);
        assert_eq!(state.active_loads, vec!["temperature", "orientation"]);
        assert!(approx_eq(state.margin_w, 25e-6, 1e-12));
    }

    #[test]
    fn voltage_gate_blocks_a_load_regardless_of_surplus() {
        // Plenty of power at 2.64 V: the 3 V orientation load never runs.
        let pv = ModuleOutput {
            power_w: 1e-3,
            vmpp_v: 2.64,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &sensor_loads());
        assert_eq!(state.mode, PowerMode::SensorActive);
        assert_eq!(state.active_loads, vec!["temperature"]);
    }

    #[test]
    fn starving_priority_load_stops_selection() {
        // The 350 µW suite is declared first and short of budget: the cheap
        // temperature load behind it stays off too. Growing the budget can
        // then only extend the active set, never reshuffle it.
        let loads = LoadProfile::new(
            10e-6,
            vec![
                Load::new("orientation", 350e-6, 3.0).unwrap(),
                Load::new("temperature", 15e-6, 0.5).unwrap(),
            ],
        )
        .unwrap();
        let pv = ModuleOutput {
            power_w: 100e-6,
            vmpp_v: 5.28,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &loads);
        assert_eq!(state.mode, PowerMode::Assisted);
        assert!(state.active_loads.is_empty());

        // A voltage-ineligible load is skipped, not a stopper.
        let low_voltage = ModuleOutput {
            power_w: 100e-6,
            vmpp_v: 0.88,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), low_voltage, &rf_profile(), &loads);
        assert_eq!(state.active_loads, vec!["temperature"]);
    }

    #[test]
    fn no_rf_at_all_is_off_even_with_pv() {
        let pv = ModuleOutput {
            power_w: 1e-3,
            vmpp_v: 5.28,
        };
        let state = evaluate_state(dbm_to_watts(-40.0), pv, &rf_profile(), &sensor_loads());
        assert_eq!(state.mode, PowerMode::Off);
    }

    #[test]
    fn pv_below_idle_with_weak_rf_is_off() {
        let pv = ModuleOutput {
            power_w: 5e-6,
            vmpp_v: 0.88,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &sensor_loads());
        assert_eq!(state.mode, PowerMode::Off);
    }

    #[test]
    fn consumed_plus_margin_is_pv_power() {
        let pv = ModuleOutput {
            power_w: 400e-6,
            vmpp_v: 5.28,
        };
        let state = evaluate_state(dbm_to_watts(-20.0), pv, &rf_profile(), &sensor_loads());
        assert!(approx_eq(
            state.consumed_w(&pv) + state.margin_w,
            pv.power_w,
            1e-15
        ));
        // idle 10 + temperature 15 + orientation 350 µW
        assert!(approx_eq(state.consumed_w(&pv), 375e-6, 1e-12));
    }

    #[test]
    fn effective_sensitivity_picks_the_threshold() {
        let rf = rf_profile();
        assert!(approx_eq(
            effective_sensitivity(SensitivityTarget::Assisted, &rf),
            5.0119e-6,
            1e-9
        ));
        assert_eq!(
            effective_sensitivity(SensitivityTarget::Passive, &rf),
            dbm_to_watts(-9.0)
        );
    }

    #[test]
    fn equal_sensitivities_mean_equal_ranges() {
        let rf = TagRfProfile::new(2.15, 1.0, 1e-5, 1e-5).unwrap();
        assert_eq!(
            effective_sensitivity(SensitivityTarget::Passive, &rf),
            effective_sensitivity(SensitivityTarget::Assisted, &rf)
        );
    }

    #[test]
    fn load_envelope_is_enforced() {
        assert!(Load::new("tiny", 0.5e-6, 1.0).is_err());
        assert!(Load::new("huge", 20e-3, 1.0).is_err());
        assert!(Load::new("novolt", 15e-6, 0.0).is_err());
        assert!(LoadProfile::new(0.0, vec![]).is_err());
    }

    #[test]
    fn mode_ordering_matches_capability() {
        assert!(PowerMode::Off < PowerMode::Passive);
        assert!(PowerMode::Passive < PowerMode::Assisted);
        assert!(PowerMode::Assisted < PowerMode::SensorActive);
    }
}
