//! Discrete-time inventory simulator.
//!
//! Runs simplified slotted-ALOHA inventory rounds over a scenario of placed
//! tags: every powered tag draws a slot uniformly in `[0, 2^Q - 1]`, a slot
//! with exactly one occupant is a successful read, and the slot-count
//! exponent Q adapts by the usual ±C heuristic. The protocol is modeled at
//! slot level only — no bit encoding, no CRC, one round per time index.
//!
//! Runs are single-threaded and fully deterministic: identical scenarios
//! (including the seed) produce identical results. Independent runs with
//! different seeds share no mutable state and may execute in parallel.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::ModelError;
use crate::harvester::{module_power, IlluminationEnv, ModuleOutput, PvModuleSpec};
use crate::power_model::{evaluate_state, LoadProfile, PowerMode, TagPowerState};
use crate::rf_link::{forward_link_power, reverse_link_rssi, ReaderProfile, TagRfProfile};

/// Default Q-adaptation step of the anti-collision heuristic.
pub const DEFAULT_Q_ADAPT_C: f64 = 0.2;

/// Largest slot-count exponent.
pub const Q_MAX: u8 = 15;

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/// A tag placed in the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct TagPlacement {
    pub id: String,
    /// Position relative to the reader antenna, meters.
    pub position_m: [f64; 3],
    pub rf: TagRfProfile,
    /// Harvester, if the tag carries one.
    pub pv: Option<PvModuleSpec>,
    pub loads: LoadProfile,
    /// Fraction of incident power the modulated reflection retains, (0, 1].
    pub backscatter_gain: f64,
}

impl TagPlacement {
    /// Euclidean reader-tag separation, meters.
    pub fn distance_m(&self) -> f64 {
        let [x, y, z] = self.position_m;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Scripted offset on one tag's reverse-link signal over a window of
/// rounds; stands in for an environmental event such as a door moving.
#[derive(Debug, Clone, PartialEq)]
pub struct RssiDisturbance {
    pub tag_id: String,
    pub start_index: u32,
    pub end_index: u32,
    pub offset_db: f64,
}

/// Everything a simulation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub reader: ReaderProfile,
    pub tags: Vec<TagPlacement>,
    pub env: IlluminationEnv,
    /// Inventory rounds to run; one round per time index.
    pub rounds: u32,
    /// Initial slot-count exponent, 0..=15.
    pub q_init: u8,
    /// Q-adaptation step; 0 freezes Q at `q_init`.
    pub q_adapt_c: f64,
    /// Standard deviation of the dB-domain RSSI noise; 0 disables noise.
    pub rssi_noise_sigma_db: f64,
    pub seed: u64,
    #[doc(hidden)]
    pub disturbances: Vec<RssiDisturbance>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.q_init > Q_MAX {
            return Err(ModelError::OutOfRange {
                name: "q_init",
                value: self.q_init as f64,
                min: 0.0,
                max: Q_MAX as f64,
            });
        }
        if self.q_adapt_c < 0.0 || !self.q_adapt_c.is_finite() {
            return Err(ModelError::OutOfRange {
                name: "q_adapt_c",
                value: self.q_adapt_c,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        if self.rssi_noise_sigma_db < 0.0 || !self.rssi_noise_sigma_db.is_finite() {
            return Err(ModelError::OutOfRange {
                name: "rssi_noise_sigma_db",
                value: self.rssi_noise_sigma_db,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let mut seen = HashSet::new();
        for tag in &self.tags {
            if !seen.insert(tag.id.as_str()) {
                return Err(ModelError::DuplicateTagId(tag.id.clone()));
            }
            ModelError::expect_positive("reader-tag distance_m", tag.distance_m())?;
            let gain_in_range = tag.backscatter_gain > 0.0 && tag.backscatter_gain <= 1.0;
            if !gain_in_range {
                return Err(ModelError::OutOfRange {
                    name: "backscatter_gain",
                    value: tag.backscatter_gain,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        for d in &self.disturbances {
            if !seen.contains(d.tag_id.as_str()) {
                return Err(ModelError::UnknownTagId {
                    wanted: d.tag_id.clone(),
                    available: self.tags.iter().map(|t| t.id.clone()).collect(),
                });
            }
            if d.start_index > d.end_index {
                return Err(ModelError::OutOfRange {
                    name: "disturbance start_index",
                    value: d.start_index as f64,
                    min: 0.0,
                    max: d.end_index as f64,
                });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

/// One reader-side observation of a powered tag in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RssiSample {
    pub time_index: u32,
    pub tag_id: String,
    pub rssi_dbm: f64,
    /// Whether the inventory round decoded this tag (sole slot occupant).
    pub read_success: bool,
    pub mode: PowerMode,
}

/// Time-ordered reader-side samples. Unpowered tags never appear.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RssiTrace {
    pub samples: Vec<RssiSample>,
}

impl RssiTrace {
    /// Samples of one tag, in time order.
    pub fn for_tag<'a, 'b>(
        &'a self,
        tag_id: &'b str,
    ) -> impl Iterator<Item = &'a RssiSample> + use<'a, 'b> {
        self.samples.iter().filter(move |s| s.tag_id == tag_id)
    }
}

/// Read counts and the full trace of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct InventoryResult {
    /// Successful reads per tag over the whole run; every tag id appears.
    pub read_counts: BTreeMap<String, u64>,
    pub trace: RssiTrace,
}

// ---------------------------------------------------------------------------
// Link state
// ---------------------------------------------------------------------------

/// Static per-tag link quantities (geometry does not change over a run).
#[derive(Debug, Clone)]
pub(crate) struct TagLinkState {
    pub state: TagPowerState,
    /// Noise-free reader-side RSSI; negative infinity when unpowered.
    pub rssi_clean_dbm: f64,
}

pub(crate) fn tag_link_state(
    reader: &ReaderProfile,
    env: &IlluminationEnv,
    tag: &TagPlacement,
) -> Result<TagLinkState, ModelError> {
    let rf_in_w = forward_link_power(reader, &tag.rf, tag.distance_m())?.received_power_w;
    let pv = tag
        .pv
        .as_ref()
        .map(|module| module_power(module, env))
        .unwrap_or(ModuleOutput::NONE);
    let state = evaluate_state(rf_in_w, pv, &tag.rf, &tag.loads);
    let rssi_clean_dbm = if state.mode >= PowerMode::Passive {
        reverse_link_rssi(reader, &tag.rf, tag.distance_m(), tag.backscatter_gain)?
    } else {
        f64::NEG_INFINITY
    };
    Ok(TagLinkState {
        state,
        rssi_clean_dbm,
    })
}

// ---------------------------------------------------------------------------
// Inventory rounds
// ---------------------------------------------------------------------------

/// Run the scenario's inventory rounds.
///
/// Per round, every tag whose power mode is at least passive draws a slot
/// uniformly in `[0, 2^Q - 1]`; a sole occupant is read successfully and
/// sampled at its reverse-link RSSI plus dB-domain Gaussian noise. After
/// the round, Q moves by `q_adapt_c` per empty slot (down) and per
/// collided slot (up), clamped to `[0, 15]`.
pub fn run_inventory(scenario: &Scenario) -> Result<InventoryResult, ModelError> {
    scenario.validate()?;

    let mut read_counts: BTreeMap<String, u64> =
        scenario.tags.iter().map(|t| (t.id.clone(), 0)).collect();

    let mut powered: Vec<(usize, TagLinkState)> = Vec::new();
    for (i, tag) in scenario.tags.iter().enumerate() {
        let link = tag_link_state(&scenario.reader, &scenario.env, tag)?;
        if link.state.mode >= PowerMode::Passive {
            powered.push((i, link));
        }
    }

    let mut trace = RssiTrace::default();
    if powered.is_empty() || scenario.rounds == 0 {
        return Ok(InventoryResult { read_counts, trace });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let noise = if scenario.rssi_noise_sigma_db > 0.0 {
        Some(Normal::new(0.0, scenario.rssi_noise_sigma_db).expect("validated sigma"))
    } else {
        None
    };

    let mut q_float = scenario.q_init as f64;
    let mut slots_scratch: Vec<u32> = Vec::new();
    let mut picks: Vec<usize> = vec![0; powered.len()];

    for round in 0..scenario.rounds {
        let q = q_float.round().clamp(0.0, Q_MAX as f64) as u32;
        let slot_count = 1usize << q;

        slots_scratch.clear();
        slots_scratch.resize(slot_count, 0);
        for (k, _) in powered.iter().enumerate() {
            let slot = rng.random_range(0..slot_count);
            picks[k] = slot;
            slots_scratch[slot] += 1;
        }

        for (k, (tag_index, link)) in powered.iter().enumerate() {
            let tag = &scenario.tags[*tag_index];
            let success = slots_scratch[picks[k]] == 1;
            let mut rssi = link.rssi_clean_dbm;
            for d in &scenario.disturbances {
                if d.tag_id == tag.id && d.start_index <= round && round <= d.end_index {
                    rssi += d.offset_db;
                }
            }
            if let Some(n) = &noise {
                rssi += n.sample(&mut rng);
            }
            if success {
                *read_counts.get_mut(&tag.id).expect("counted above") += 1;
            }
            trace.samples.push(RssiSample {
                time_index: round,
                tag_id: tag.id.clone(),
                rssi_dbm: rssi,
                read_success: success,
                mode: link.state.mode,
            });
        }

        if scenario.q_adapt_c > 0.0 {
            for &occupancy in &slots_scratch {
                if occupancy == 0 {
                    q_float -= scenario.q_adapt_c;
                } else if occupancy > 1 {
                    q_float += scenario.q_adapt_c;
                }
            }
            q_float = q_float.clamp(0.0, Q_MAX as f64);
        }
    }

    Ok(InventoryResult { read_counts, trace })
}

// ---------------------------------------------------------------------------
// Range sweep
// ---------------------------------------------------------------------------

/// Read behavior of one tag at one sweep distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub distance_m: f64,
    pub mode: PowerMode,
    /// Fraction of rounds in which the tag was read.
    pub read_success_probability: f64,
}

/// Re-run the scenario with the named tag moved to each distance in turn
/// and report its power mode and empirical read probability there.
pub fn range_sweep(
    scenario: &Scenario,
    tag_id: &str,
    distances: &[f64],
) -> Result<Vec<SweepPoint>, ModelError> {
    scenario.validate()?;
    let tag_index = scenario
        .tags
        .iter()
        .position(|t| t.id == tag_id)
        .ok_or_else(|| ModelError::UnknownTagId {
            wanted: tag_id.to_string(),
            available: scenario.tags.iter().map(|t| t.id.clone()).collect(),
        })?;
    for &d in distances {
        ModelError::expect_positive("sweep distance_m", d)?;
    }

    let mut points = Vec::with_capacity(distances.len());
    for &distance in distances {
        let mut moved = scenario.clone();
        moved.tags[tag_index].position_m = [distance, 0.0, 0.0];
        let link = tag_link_state(&moved.reader, &moved.env, &moved.tags[tag_index])?;
        let result = run_inventory(&moved)?;
        let reads = result.read_counts[tag_id];
        let probability = if moved.rounds == 0 {
            0.0
        } else {
            reads as f64 / moved.rounds as f64
        };
        points.push(SweepPoint {
            distance_m: distance,
            mode: link.state.mode,
            read_success_probability: probability,
        });
    }
    Ok(points)
}

// ===========================================================================
// Tests
// ===========================================================================
