//! End-to-end synthetic experiments.

mod calibration;
mod fit;
mod gain_curve;
mod hbt;
mod histogram;
mod report;
mod scan;

pub use calibration::{run_calibration, CalibrationResult, NOISE_DOMINATED_STD_ERROR};
pub use fit::{fit_gaussian, FitParameter, GaussianFit};
pub use gain_curve::{read_gain_curve_csv, synthesize_gain_curve, GainCurveConfig, GainCurvePoint};
pub use hbt::{expected_hbt_g2, run_hbt, HbtConfig, HbtRun};
pub use histogram::{run_histogram, HistogramBin, HistogramConfig, SignalHistogram, SignalSource, DEFAULT_BIN_WIDTH};
pub use report::{write_csv, Summary, SCHEMA_VERSION};
pub use scan::{expected_scan_g2, overlap_weight, run_scan, ScanConfig, ScanCoordinate, ScanPoint, ScanResult};
