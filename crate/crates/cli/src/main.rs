//! `bsv`: photon-statistics scenarios from the command line.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 numerical failure (fit
//! non-convergence, undefined estimator), 1 anything else (e.g. I/O).

mod commands;
mod settings;

use std::process::ExitCode;

use bsv_sim::scenarios::ScanCoordinate;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bsv",
    version,
    about = "Monte Carlo photon statistics of bright squeezed vacuum and thermal light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hanbury Brown-Twiss g2 of one source through a beamsplitter and two detectors
    Hbt(commands::HbtArgs),
    /// g2 versus detection angle across the degenerate direction, with a Gaussian fit
    ScanAngle(commands::ScanArgs),
    /// g2 versus wavelength across the degenerate wavelength, with a Gaussian fit
    ScanWavelength(commands::ScanArgs),
    /// Single-detector signal histogram with its theoretical overlay
    Histogram(commands::HistogramArgs),
    /// Coherent-light calibration of the HBT setup
    Calibrate(commands::CalibrateArgs),
    /// Fit of the parametric gain to a PDC signal versus pump power curve
    GainFit(commands::GainFitArgs),
    /// Thermal and squeezed-vacuum g2 over m effective modes
    Modes(commands::ModesArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = match &cli.command {
        Command::Hbt(a) => commands::hbt(a),
        Command::ScanAngle(a) => commands::scan("scan-angle", ScanCoordinate::AngleMrad, a),
        Command::ScanWavelength(a) => commands::scan("scan-wavelength", ScanCoordinate::WavelengthNm, a),
        Command::Histogram(a) => commands::histogram(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::GainFit(a) => commands::gain_fit(a),
        Command::Modes(a) => commands::modes(a),
    };
    match outcome {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
