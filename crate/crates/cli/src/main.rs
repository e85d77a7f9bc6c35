//! `pvtag` — range, sizing, simulation, and detection tools for
//! photovoltaic-assisted backscatter tags.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error, 4 domain error.

use pvtag_cli::{commands, error};

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use pvtag_core::harvester::{BendRadius, EnvClass};
use pvtag_core::sensing_apps::DetectorParams;
use pvtag_core::sensing_apps::{
    DEFAULT_AXIS_DOMINANCE, DEFAULT_CALIB_WINDOW, DEFAULT_G_TOLERANCE_M_S2, DEFAULT_K_SIGMA,
    DEFAULT_MIN_RUN, DEFAULT_SIGMA_FLOOR_DB,
};

use crate::commands::DetectArgs;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "pvtag",
    version,
    about = "Link budgets, PV sizing, and inventory simulation for photovoltaic-assisted backscatter tags"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Passive and assisted read ranges of a tag, and their ratio.
    Range {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Tag id to report on.
        #[arg(long)]
        tag: String,
        /// Print the normalized scenario instead of running.
        #[arg(long)]
        dump_normalized: bool,
    },
    /// PV area required to cover a load.
    PvSize {
        /// Load power in microwatts.
        #[arg(long)]
        load_uw: f64,
        /// Cell conversion efficiency as a fraction, e.g. 0.13.
        #[arg(long)]
        efficiency: f64,
        /// Illumination environment class.
        #[arg(long, value_enum, default_value_t = EnvArg::OutdoorSun)]
        env: EnvArg,
        /// Bend radius in millimeters, or `flat`.
        #[arg(long, default_value = "flat")]
        bend_mm: BendArg,
        /// Override the class-default irradiance, in microwatts per cm^2.
        #[arg(long)]
        irradiance_uw_cm2: Option<f64>,
    },
    /// Run the scenario's inventory rounds and write the trace CSV.
    Simulate {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Output CSV path.
        #[arg(long, required_unless_present = "dump_normalized")]
        out: Option<PathBuf>,
        /// Print the normalized scenario instead of running.
        #[arg(long)]
        dump_normalized: bool,
    },
    /// Detect activity events by differencing two trace CSVs.
    Detect {
        /// Trace CSV holding the activity tag.
        #[arg(long)]
        activity: PathBuf,
        /// Trace CSV holding the reference tag.
        #[arg(long)]
        reference: PathBuf,
        /// Tag id to use from the activity CSV (required if it holds several).
        #[arg(long)]
        activity_tag: Option<String>,
        /// Tag id to use from the reference CSV (required if it holds several).
        #[arg(long)]
        reference_tag: Option<String>,
        /// Leading aligned samples used to calibrate the baseline.
        #[arg(long, default_value_t = DEFAULT_CALIB_WINDOW)]
        calib_window: usize,
        /// Detection threshold in calibration deviations.
        #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
        k_sigma: f64,
        /// Minimum consecutive deviating samples per event.
        #[arg(long, default_value_t = DEFAULT_MIN_RUN)]
        min_run: usize,
        /// Floor on the calibration deviation, dB.
        #[arg(long, default_value_t = DEFAULT_SIGMA_FLOOR_DB)]
        sigma_floor_db: f64,
    },
    /// Decode a stationary accelerometer vector to an orientation label.
    #[command(allow_negative_numbers = true)]
    Orient {
        /// Acceleration along x, m/s^2.
        ax: f64,
        /// Acceleration along y, m/s^2.
        ay: f64,
        /// Acceleration along z, m/s^2.
        az: f64,
        /// Stationarity tolerance on the norm, m/s^2.
        #[arg(long, default_value_t = DEFAULT_G_TOLERANCE_M_S2)]
        g_tolerance: f64,
        /// Ratio the winning axis must hold over the runner-up.
        #[arg(long, default_value_t = DEFAULT_AXIS_DOMINANCE)]
        axis_dominance: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvArg {
    OutdoorSun,
    IndoorLit,
}

impl From<EnvArg> for EnvClass {
    fn from(value: EnvArg) -> Self {
        match value {
            EnvArg::OutdoorSun => EnvClass::OutdoorSun,
            EnvArg::IndoorLit => EnvClass::IndoorLit,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BendArg(BendRadius);

impl FromStr for BendArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("flat") {
            return Ok(BendArg(BendRadius::Flat));
        }
        s.parse::<f64>()
            .map(|mm| BendArg(BendRadius::Millimeters(mm)))
            .map_err(|_| format!("expected a radius in millimeters or `flat`, got {s:?}"))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Range {
            scenario,
            tag,
            dump_normalized,
        } => commands::cmd_range(&scenario, &tag, dump_normalized),
        Command::PvSize {
            load_uw,
            efficiency,
            env,
            bend_mm,
            irradiance_uw_cm2,
        } => commands::cmd_pv_size(
            load_uw,
            efficiency,
            env.into(),
            bend_mm.0,
            irradiance_uw_cm2,
        ),
        Command::Simulate {
            scenario,
            out,
            dump_normalized,
        } => commands::cmd_simulate(&scenario, out.as_deref(), dump_normalized),
        Command::Detect {
            activity,
            reference,
            activity_tag,
            reference_tag,
            calib_window,
            k_sigma,
            min_run,
            sigma_floor_db,
        } => commands::cmd_detect(&DetectArgs {
            activity_path: &activity,
            reference_path: &reference,
            activity_tag: activity_tag.as_deref(),
            reference_tag: reference_tag.as_deref(),
            params: DetectorParams {
                calib_window,
                k_sigma,
                min_run,
                sigma_floor_db,
            },
        }),
        Command::Orient {
            ax,
            ay,
            az,
            g_tolerance,
            axis_dominance,
        } => commands::cmd_orient([ax, ay, az], g_tolerance, axis_dominance),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
