//! Subcommand arguments, parameter sets and runners.
//!
//! Every runner writes `<out>/<name>.csv`, `<out>/summary.json` and
//! `<out>/manifest.json`, and returns the one-line summary.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bsv_sim::chain::{DEFAULT_NOISE_FWHM, DEFAULT_TRANSMITTANCE, DEFAULT_VOLTS_PER_PHOTON};
use bsv_sim::io::{write_records_binary, write_records_csv};
use bsv_sim::modes::{compose_fractional_m, fit_gain, mean_photons_from_gain};
use bsv_sim::scenarios::{
    expected_hbt_g2, expected_scan_g2, read_gain_curve_csv, run_calibration, run_hbt, run_histogram, run_scan,
    synthesize_gain_curve, write_csv, GainCurveConfig, HbtConfig, HistogramConfig, ScanConfig, ScanCoordinate,
    SignalSource, Summary,
};
use bsv_sim::{Detector, DistributionKind, OpticalChain, SeedStream};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::settings::{resolve, CliError};

const DEFAULT_PULSES: usize = 1_000_000;
const DEFAULT_SCAN_PULSES: usize = 100_000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_M: f64 = 1.25;
const DEFAULT_MEAN: f64 = 8000.0;

#[derive(Args, Serialize, Debug, Default)]
pub struct CommonArgs {
    /// Pulses to simulate [default: 1000000; 100000 per point for scans; ignored by gain-fit]
    #[arg(long)]
    pulses: Option<usize>,
    /// Master seed; all randomness derives from it [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Effective number of detected modes, ≥ 1 [default: 1 for hbt, 1.25 for scans and modes; ignored by
    /// histogram, calibrate and gain-fit]
    #[arg(long)]
    m: Option<f64>,
    /// Config file (TOML, or JSON such as a run manifest); flags override it
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct Common {
    pulses: usize,
    seed: u64,
    out: PathBuf,
    m: f64,
}

impl Common {
    fn new(pulses: usize, m: f64) -> Self {
        Common {
            pulses,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            m,
        }
    }
}

#[derive(Args, Serialize, Debug, Default)]
pub struct DetectorArgs {
    /// Detector conversion, nV·s per photon [default: 0.00875]
    #[arg(long)]
    volts_per_photon: Option<f64>,
    /// FWHM of the additive electronic noise, nV·s [default: 10]
    #[arg(long)]
    noise_fwhm: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct DetectorParams {
    volts_per_photon: f64,
    noise_fwhm: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            volts_per_photon: DEFAULT_VOLTS_PER_PHOTON,
            noise_fwhm: DEFAULT_NOISE_FWHM,
        }
    }
}

impl DetectorParams {
    fn detector(&self) -> Result<Detector, CliError> {
        Ok(Detector::new(self.volts_per_photon, self.noise_fwhm)?)
    }
}

#[derive(Args, Serialize, Debug, Default)]
pub struct OpticsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    detector: DetectorArgs,
    /// Beamsplitter transmittance, in (0, 1) [default: 0.5]
    #[arg(long)]
    transmittance: Option<f64>,
    /// Transmission of a loss in front of the beamsplitter, in (0, 1] [default: 1]
    #[arg(long)]
    input_transmission: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct OpticsParams {
    #[serde(flatten)]
    detector: DetectorParams,
    transmittance: f64,
    input_transmission: f64,
}

impl Default for OpticsParams {
    fn default() -> Self {
        OpticsParams {
            detector: DetectorParams::default(),
            transmittance: DEFAULT_TRANSMITTANCE,
            input_transmission: 1.0,
        }
    }
}

impl OpticsParams {
    fn chain(&self) -> Result<OpticalChain, CliError> {
        let chain = OpticalChain::hbt(self.detector.detector()?, self.transmittance)?;
        if self.input_transmission == 1.0 {
            Ok(chain)
        } else {
            Ok(chain.with_input_loss(self.input_transmission)?)
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Thermal,
    Squeezed,
    Poisson,
    TwinBeam,
}

impl Kind {
    fn distribution(self) -> DistributionKind {
        match self {
            Kind::Thermal => DistributionKind::Thermal,
            Kind::Squeezed => DistributionKind::SqueezedVacuum,
            Kind::Poisson => DistributionKind::Poisson,
            Kind::TwinBeam => DistributionKind::TwinBeamJoint,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Thermal => "thermal",
            Kind::Squeezed => "squeezed",
            Kind::Poisson => "poisson",
            Kind::TwinBeam => "twin-beam",
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFormat {
    None,
    Csv,
    Bin,
}

/// Value ± error, with enough decimals to show two digits of the error.
fn pm(value: f64, err: f64) -> String {
    let digits = if err > 0.0 && err.is_finite() {
        (1.0 - err.log10().floor()).clamp(4.0, 10.0) as usize
    } else {
        4
    };
    format!("{value:.digits$} ± {err:.digits$}")
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

#[derive(Serialize)]
struct Manifest<'a, P> {
    command: &'a str,
    params: &'a P,
    master_seed: u64,
    artifact_version: &'a str,
    wall_clock_seconds: f64,
}

/// Resolves the parameters, runs `body` and writes the manifest. Runs that
/// fail numerically keep their manifest next to the partial outputs; runs
/// rejected for invalid input write none.
fn execute<P, F>(
    command: &str,
    flags: &F,
    config: Option<&Path>,
    defaults: P,
    body: impl FnOnce(&P, &Common) -> Result<String, CliError>,
) -> Result<String, CliError>
where
    P: Serialize + DeserializeOwned,
    F: Serialize,
{
    let start = Instant::now();
    let params: P = resolve(command, flags, config, &defaults)?;
    let common: Common = serde_json::from_value(serde_json::to_value(&params).map_err(bsv_sim::Error::from)?)
        .map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))?;
    if !(common.m >= 1.0 && common.m.is_finite()) {
        return Err(CliError::Usage(format!(
            "m must be a finite number ≥ 1 (got {})",
            common.m
        )));
    }
    fs::create_dir_all(&common.out)?;
    let result = body(&params, &common);
    if matches!(&result, Err(e) if e.exit_code() != 3) {
        return result;
    }
    let manifest = Manifest {
        command,
        params: &params,
        master_seed: common.seed,
        artifact_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let mut w = create(&common.out, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(bsv_sim::Error::from)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    std::io::Write::flush(&mut w)?;
    result
}

// ---- hbt ----

#[derive(Args, Serialize, Debug)]
pub struct HbtArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    optics: OpticsArgs,
    /// Light source [default: squeezed]
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Mean photons per pulse over all modes [default: 8000]
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
    /// Also write the raw pulse records [default: none]
    #[arg(long, value_enum)]
    records: Option<RecordFormat>,
}

#[derive(Serialize, Deserialize)]
struct HbtParams {
    #[serde(flatten)]
    common: Common,
    #[serde(flatten)]
    optics: OpticsParams,
    kind: Kind,
    mean: f64,
    records: RecordFormat,
}

#[derive(Serialize)]
struct HbtRow {
    kind: &'static str,
    mean_photons: f64,
    m: f64,
    g2: f64,
    std_error: f64,
    expected_g2: f64,
}

pub fn hbt(args: &HbtArgs) -> Result<String, CliError> {
    let defaults = HbtParams {
        common: Common::new(DEFAULT_PULSES, 1.0),
        optics: OpticsParams::default(),
        kind: Kind::Squeezed,
        mean: DEFAULT_MEAN,
        records: RecordFormat::None,
    };
    execute(
        "hbt",
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &HbtParams, c| {
            let config = HbtConfig {
                kind: p.kind.distribution(),
                mean_photons: p.mean,
                pulses: c.pulses,
                m: c.m,
                chain: p.optics.chain()?,
            };
            let run = run_hbt(&config, SeedStream::new(c.seed))?;
            let row = HbtRow {
                kind: p.kind.name(),
                mean_photons: p.mean,
                m: c.m,
                g2: run.estimate.g2,
                std_error: run.estimate.std_error,
                expected_g2: run.expected_g2,
            };
            write_csv(create(&c.out, "hbt.csv")?, &[&row])?;
            match p.records {
                RecordFormat::None => {}
                RecordFormat::Csv => write_records_csv(create(&c.out, "records.csv")?, &run.records)?,
                RecordFormat::Bin => write_records_binary(create(&c.out, "records.bin")?, &run.records)?,
            }
            #[derive(Serialize)]
            struct Result<'a> {
                kind: &'static str,
                mean_photons: f64,
                m: f64,
                per_mode_means: &'a [f64],
                g2: f64,
                std_error: f64,
                expected_g2: f64,
                z_score: f64,
            }
            let result = Result {
                kind: row.kind,
                mean_photons: p.mean,
                m: c.m,
                per_mode_means: run.composition.per_mode_means(),
                g2: row.g2,
                std_error: row.std_error,
                expected_g2: row.expected_g2,
                z_score: run.estimate.z_score(run.expected_g2),
            };
            Summary::new("hbt", c.seed, c.pulses, result).write_json(create(&c.out, "summary.json")?)?;
            Ok(format!(
                "hbt {} N={} m={}: g2 = {} (expected {:.4})",
                row.kind,
                p.mean,
                c.m,
                pm(row.g2, row.std_error),
                row.expected_g2
            ))
        },
    )
}

// ---- scans ----

#[derive(Args, Serialize, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    optics: OpticsArgs,
    /// Comma-separated scan coordinates [default: 25 points, centre ± 12 steps of 1 mrad or 0.05 nm]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Option<Vec<f64>>,
    /// Degenerate point [default: 0 mrad or 709.3 nm]
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,
    /// FWHM of the generating overlap profile [default: 4.1 mrad or 0.22 nm]
    #[arg(long)]
    fwhm: Option<f64>,
    /// Mean photons per pulse [default: 8000]
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScanParams {
    #[serde(flatten)]
    common: Common,
    #[serde(flatten)]
    optics: OpticsParams,
    points: Vec<f64>,
    center: f64,
    fwhm: f64,
    mean: f64,
}

pub fn scan(command: &str, coordinate: ScanCoordinate, args: &ScanArgs) -> Result<String, CliError> {
    let defaults = ScanParams {
        common: Common::new(DEFAULT_SCAN_PULSES, DEFAULT_M),
        optics: OpticsParams::default(),
        points: coordinate.default_points(),
        center: coordinate.default_center(),
        fwhm: coordinate.default_fwhm(),
        mean: DEFAULT_MEAN,
    };
    execute(
        command,
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &ScanParams, c| {
            let config = ScanConfig {
                coordinate,
                points: p.points.clone(),
                center: p.center,
                profile_fwhm: p.fwhm,
                pulses_per_point: c.pulses,
                base_m: c.m,
                mean_photons: p.mean,
                chain: p.optics.chain()?,
            };
            let result = run_scan(&config, SeedStream::new(c.seed))?;
            write_csv(create(&c.out, "scan.csv")?, &result.points)?;

            #[derive(Serialize)]
            struct Report<'a> {
                coordinate: ScanCoordinate,
                unit: &'static str,
                center: f64,
                profile_fwhm: f64,
                base_m: f64,
                mean_photons: f64,
                expected_baseline: f64,
                expected_peak: f64,
                fit: &'a Option<bsv_sim::scenarios::GaussianFit>,
                fit_error: &'a Option<String>,
            }
            let far = p.center + 1e3 * p.fwhm;
            let report = Report {
                coordinate,
                unit: coordinate.unit(),
                center: p.center,
                profile_fwhm: p.fwhm,
                base_m: c.m,
                mean_photons: p.mean,
                expected_baseline: expected_scan_g2(&config, far)?,
                expected_peak: expected_scan_g2(&config, p.center)?,
                fit: &result.fit,
                fit_error: &result.fit_error,
            };
            Summary::new(command, c.seed, c.pulses, report).write_json(create(&c.out, "summary.json")?)?;
            match (&result.fit, &result.fit_error) {
                (Some(f), _) => Ok(format!(
                    "{command}: fwhm = {} {u}, center = {} {u}, baseline = {}, peak = {}{}",
                    pm(f.fwhm.value, f.fwhm.std_error),
                    pm(f.center.value, f.center.std_error),
                    pm(f.baseline.value, f.baseline.std_error),
                    pm(f.peak(), f.peak_std_error),
                    if f.center_degenerate {
                        " (centre not identified)"
                    } else {
                        ""
                    },
                    u = coordinate.unit(),
                )),
                (None, err) => Err(CliError::Numerical(format!(
                    "{command}: Gaussian fit failed ({}); raw points written to scan.csv",
                    err.as_deref().unwrap_or("unknown error")
                ))),
            }
        },
    )
}

// ---- histogram ----

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Thermal,
    Squeezed,
    Dark,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Thermal => "thermal",
            Source::Squeezed => "squeezed",
            Source::Dark => "dark",
        }
    }
}

#[derive(Args, Serialize, Debug)]
pub struct HistogramArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    detector: DetectorArgs,
    /// Light on the detector; dark records the noise alone [default: thermal]
    #[arg(long, value_enum)]
    source: Option<Source>,
    /// Mean noiseless signal, nV·s [default: 70]
    #[arg(long, allow_hyphen_values = true)]
    mean_signal: Option<f64>,
    /// Bin width, nV·s [default: 2]
    #[arg(long)]
    bin_width: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct HistogramParams {
    #[serde(flatten)]
    common: Common,
    #[serde(flatten)]
    detector: DetectorParams,
    source: Source,
    mean_signal: f64,
    bin_width: f64,
}

pub fn histogram(args: &HistogramArgs) -> Result<String, CliError> {
    let defaults = HistogramParams {
        common: Common::new(DEFAULT_PULSES, 1.0),
        detector: DetectorParams::default(),
        source: Source::Thermal,
        mean_signal: 70.0,
        bin_width: bsv_sim::scenarios::DEFAULT_BIN_WIDTH,
    };
    execute(
        "histogram",
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &HistogramParams, c| {
            let source = match p.source {
                Source::Thermal => SignalSource::Thermal,
                Source::Squeezed => SignalSource::SqueezedVacuum,
                Source::Dark => SignalSource::Dark,
            };
            let config = HistogramConfig {
                detector: p.detector.detector()?,
                bin_width: p.bin_width,
                ..HistogramConfig::new(source, p.mean_signal, c.pulses)
            };
            let h = run_histogram(&config, SeedStream::new(c.seed))?;
            write_csv(create(&c.out, "histogram.csv")?, &h.bins)?;
            let peak = match source {
                SignalSource::Dark => Some(h.fit_peak()?),
                _ => None,
            };

            #[derive(Serialize)]
            struct Report<'a> {
                source: SignalSource,
                mean_signal_nvs: f64,
                mean_photons: f64,
                bin_width: f64,
                bins: usize,
                underflow: u64,
                overflow: u64,
                theory_total: f64,
                photon_g2: Option<bsv_sim::G2Estimate>,
                noise_fit: &'a Option<bsv_sim::scenarios::GaussianFit>,
            }
            let report = Report {
                source,
                mean_signal_nvs: if source == SignalSource::Dark {
                    0.0
                } else {
                    p.mean_signal
                },
                mean_photons: h.mean_photons,
                bin_width: h.bin_width,
                bins: h.bins.len(),
                underflow: h.underflow,
                overflow: h.overflow,
                theory_total: h.theory_total(),
                photon_g2: h.photon_g2,
                noise_fit: &peak,
            };
            Summary::new("histogram", c.seed, c.pulses, report).write_json(create(&c.out, "summary.json")?)?;
            let detail = match (&peak, h.photon_g2) {
                (Some(f), _) => format!("noise FWHM = {} nV·s", pm(f.fwhm.value, f.fwhm.std_error)),
                (None, Some(g)) => format!("photon-number g2 = {}", pm(g.g2, g.std_error)),
                (None, None) => String::new(),
            };
            Ok(format!(
                "histogram {}: {} bins of {} nV·s, {detail}",
                p.source.name(),
                h.bins.len(),
                h.bin_width
            ))
        },
    )
}

// ---- calibrate ----

#[derive(Args, Serialize, Debug)]
pub struct CalibrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    detector: DetectorArgs,
    /// Mean photons per pulse of the attenuated coherent beam [default: 8000]
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CalibrateParams {
    #[serde(flatten)]
    common: Common,
    #[serde(flatten)]
    detector: DetectorParams,
    mean: f64,
}

pub fn calibrate(args: &CalibrateArgs) -> Result<String, CliError> {
    let defaults = CalibrateParams {
        common: Common::new(DEFAULT_PULSES, 1.0),
        detector: DetectorParams::default(),
        mean: DEFAULT_MEAN,
    };
    execute(
        "calibrate",
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &CalibrateParams, c| {
            let r = run_calibration(p.mean, c.pulses, p.detector.detector()?, SeedStream::new(c.seed))?;

            #[derive(Serialize)]
            struct Row {
                mean_photons: f64,
                g2: f64,
                std_error: f64,
                mean_signal_per_channel: f64,
                noise_sigma: f64,
                noise_dominated: bool,
            }
            let row = Row {
                mean_photons: p.mean,
                g2: r.estimate.g2,
                std_error: r.estimate.std_error,
                mean_signal_per_channel: r.mean_signal_per_channel,
                noise_sigma: r.noise_sigma,
                noise_dominated: r.noise_dominated,
            };
            write_csv(create(&c.out, "calibration.csv")?, &[&row])?;
            Summary::new("calibrate", c.seed, c.pulses, &row).write_json(create(&c.out, "summary.json")?)?;
            Ok(format!(
                "calibrate N={}: g2 = {}{}",
                p.mean,
                pm(row.g2, row.std_error),
                if row.noise_dominated { " (noise dominated)" } else { "" }
            ))
        },
    )
}

// ---- gain-fit ----

#[derive(Args, Serialize, Debug)]
pub struct GainFitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Measured curve to fit instead of synthetic data, CSV with header pump_power_mw,signal
    #[arg(long)]
    data: Option<PathBuf>,
    /// Gain at the highest pump power of the synthetic curve [default: 15.8]
    #[arg(long, allow_hyphen_values = true)]
    gamma_max: Option<f64>,
    /// Highest pump power of the synthetic curve, mW [default: 75]
    #[arg(long, allow_hyphen_values = true)]
    max_power: Option<f64>,
    /// Number of synthetic pump powers [default: 12]
    #[arg(long)]
    points: Option<usize>,
    /// Relative noise of each synthetic signal [default: 0.01]
    #[arg(long, allow_hyphen_values = true)]
    relative_noise: Option<f64>,
    /// Scale A of the synthetic signal A·sinh²Γ [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct GainFitParams {
    #[serde(flatten)]
    common: Common,
    data: Option<PathBuf>,
    gamma_max: f64,
    max_power: f64,
    points: usize,
    relative_noise: f64,
    scale: f64,
}

pub fn gain_fit(args: &GainFitArgs) -> Result<String, CliError> {
    let synthetic = GainCurveConfig::default();
    let defaults = GainFitParams {
        common: Common::new(0, 1.0),
        data: None,
        gamma_max: synthetic.gamma_max,
        max_power: synthetic.max_power,
        points: synthetic.points,
        relative_noise: synthetic.relative_noise,
        scale: synthetic.scale,
    };
    execute(
        "gain-fit",
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &GainFitParams, c| {
            let (powers, signals) = match &p.data {
                Some(path) => {
                    let file = File::open(path)
                        .map_err(|e| CliError::Usage(format!("cannot read data {}: {e}", path.display())))?;
                    read_gain_curve_csv(file)?
                }
                None => {
                    let cfg = GainCurveConfig {
                        gamma_max: p.gamma_max,
                        scale: p.scale,
                        max_power: p.max_power,
                        points: p.points,
                        relative_noise: p.relative_noise,
                    };
                    synthesize_gain_curve(&cfg, SeedStream::new(c.seed))?
                }
            };
            let fit = fit_gain(&powers, &signals)?;

            #[derive(Serialize)]
            struct Row {
                pump_power_mw: f64,
                signal: f64,
                model: f64,
            }
            let rows: Vec<Row> = powers
                .iter()
                .zip(&signals)
                .map(|(&pump_power_mw, &signal)| Row {
                    pump_power_mw,
                    signal,
                    model: fit.model(pump_power_mw),
                })
                .collect();
            write_csv(create(&c.out, "gain_curve.csv")?, &rows)?;
            let photons = mean_photons_from_gain(fit.gamma_max)?;

            #[derive(Serialize)]
            struct Report<'a> {
                source: &'a str,
                fit: &'a bsv_sim::modes::GainFit,
                photons_per_mode_at_max: f64,
            }
            let report = Report {
                source: if p.data.is_some() { "data" } else { "synthetic" },
                fit: &fit,
                photons_per_mode_at_max: photons,
            };
            Summary::new("gain-fit", c.seed, 0, report).write_json(create(&c.out, "summary.json")?)?;
            Ok(format!(
                "gain-fit: Γ_max = {}, N = {photons:.3e} photons per mode at {} mW{}",
                pm(fit.gamma_max, fit.gamma_std_error),
                fit.max_power,
                if fit.degenerate {
                    " (degenerate: curve is linear in power)"
                } else {
                    ""
                }
            ))
        },
    )
}

// ---- modes ----

#[derive(Args, Serialize, Debug)]
pub struct ModesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    optics: OpticsArgs,
    /// Mean photons per pulse over all modes [default: 8000]
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModesParams {
    #[serde(flatten)]
    common: Common,
    #[serde(flatten)]
    optics: OpticsParams,
    mean: f64,
}

pub fn modes(args: &ModesArgs) -> Result<String, CliError> {
    let defaults = ModesParams {
        common: Common::new(DEFAULT_PULSES, DEFAULT_M),
        optics: OpticsParams::default(),
        mean: DEFAULT_MEAN,
    };
    execute(
        "modes",
        args,
        args.common.config.as_deref(),
        defaults,
        |p: &ModesParams, c| {
            let composition = compose_fractional_m(c.m, p.mean)?;
            let stream = SeedStream::new(c.seed);

            #[derive(Serialize)]
            struct Row {
                kind: &'static str,
                m: f64,
                modes: usize,
                expected_g2: f64,
                g2: f64,
                std_error: f64,
            }
            let mut rows = Vec::new();
            for (i, kind) in [Kind::Thermal, Kind::Squeezed].into_iter().enumerate() {
                let config = HbtConfig {
                    kind: kind.distribution(),
                    mean_photons: p.mean,
                    pulses: c.pulses,
                    m: c.m,
                    chain: p.optics.chain()?,
                };
                let run = run_hbt(&config, stream.child(i as u64))?;
                rows.push(Row {
                    kind: kind.name(),
                    m: c.m,
                    modes: composition.per_mode_means().len(),
                    expected_g2: expected_hbt_g2(kind.distribution(), &composition),
                    g2: run.estimate.g2,
                    std_error: run.estimate.std_error,
                });
            }
            write_csv(create(&c.out, "modes.csv")?, &rows)?;

            #[derive(Serialize)]
            struct Report<'a> {
                m: f64,
                per_mode_means: &'a [f64],
                effective_mode_count: f64,
                runs: &'a [Row],
            }
            let report = Report {
                m: c.m,
                per_mode_means: composition.per_mode_means(),
                effective_mode_count: composition.effective_mode_count(),
                runs: &rows,
            };
            Summary::new("modes", c.seed, c.pulses, report).write_json(create(&c.out, "summary.json")?)?;
            let parts: Vec<String> = rows
                .iter()
                .map(|r| format!("{} {} (expected {:.4})", r.kind, pm(r.g2, r.std_error), r.expected_g2))
                .collect();
            Ok(format!(
                "modes m={} ({} modes): {}",
                c.m,
                composition.per_mode_means().len(),
                parts.join(", ")
            ))
        },
    )
}
