//! Command-line front end.
//!
//! Three subcommands, all emitting plain text or CSV:
//!
//! * `stats` dumps per-index eigenvalues and decision statistics for one
//!   snapshot block per sweep value (SNR or snapshot count);
//! * `estimate` runs the selected detectors on one seeded block;
//! * `sweep` runs a Monte Carlo sweep and writes an error-rate report.
//!
//! Exit status: 0 on success, 1 for configuration errors, 2 for runtime or
//! I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::array_model::{ArrayGeometry, Scenario, SnrReference, DEFAULT_RADIUS};
use crate::detectors::{Detector, DetectorKind, ThresholdParams};
use crate::montecarlo::{
    decision_statistics, run_sweep_with, run_trial, scenario_at, trial_rng, AzimuthPolicy,
    Execution, SweepAxis, SweepSpec,
};
use crate::parse::{parse_angles_deg, parse_detector_list, parse_value_list};
use crate::report::{write_atomic, write_stats_csv};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sourcecount",
    version,
    about = "Estimate the number of sources seen by a uniform circular array"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump eigenvalues, moving increments and moving STDs per index.
    Stats(StatsArgs),
    /// Run detectors on a single seeded snapshot block.
    Estimate(EstimateArgs),
    /// Monte Carlo error-rate sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnrReferenceArg {
    /// Relative to the total received signal power per element.
    Total,
    /// Relative to one unit-power source.
    PerSource,
}

impl From<SnrReferenceArg> for SnrReference {
    fn from(v: SnrReferenceArg) -> Self {
        match v {
            SnrReferenceArg::Total => SnrReference::TotalReceived,
            SnrReferenceArg::PerSource => SnrReference::PerSource,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Number of array elements (M).
    #[arg(long, default_value_t = 8)]
    pub elements: usize,
    /// Number of sources (K). Defaults to the number of --angles, or 2.
    #[arg(long)]
    pub sources: Option<usize>,
    /// Source azimuths in degrees, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// Snapshots per block (N).
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// SNR in dB; a single value or a comma list.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub snr: String,
    /// Array radius in wavelengths.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "total")]
    pub snr_reference: SnrReferenceArg,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Detectors, comma-separated (aic, mdl, moving_increment, moving_std,
    /// increment_threshold, or the groups main/all).
    #[arg(long, default_value = "main")]
    pub detectors: String,
    /// Threshold coefficient for increment_threshold.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Signal power estimate for increment_threshold.
    #[arg(long)]
    pub signal_power: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Sweep axis: snr or samples.
    #[arg(long, default_value = "snr")]
    pub axis: String,
    /// Axis values; defaults to the --snr list for the snr axis.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub detectors: DetectorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub detectors: DetectorArgs,
    /// Sweep axis: snr, samples, sources or elements.
    #[arg(long, default_value = "snr")]
    pub axis: String,
    /// Axis values (comma list or start:stop:step); defaults to the --snr
    /// list for the snr axis.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Trials per axis value.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Draw fresh source azimuths for every trial.
    #[arg(long)]
    pub redraw_azimuths: bool,
    /// Run trials on a single thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Stats,
    Estimate,
    Sweep,
}

/// Fully validated configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub scenario: Scenario,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub detectors: Vec<Detector>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub azimuth_policy: AzimuthPolicy,
    pub execution: Execution,
}

fn base_scenario(args: &ScenarioArgs, snr_db: f64) -> Result<Scenario> {
    let geometry = ArrayGeometry::uniform_circular(args.elements, args.radius)?;
    let scenario = match &args.angles {
        Some(text) => {
            let angles = parse_angles_deg(text)?;
            if let Some(k) = args.sources {
                if k != angles.len() {
                    return Err(Error::config(format!(
                        "--sources {k} does not match {} --angles",
                        angles.len()
                    )));
                }
            }
            Scenario::new(geometry, angles, args.samples, snr_db)?
        }
        None => Scenario::with_default_azimuths(
            geometry,
            args.sources.unwrap_or(2),
            args.samples,
            snr_db,
        )?,
    };
    Ok(scenario.with_snr_reference(args.snr_reference.into()))
}

fn snr_list(args: &ScenarioArgs) -> Result<Vec<f64>> {
    let v = parse_value_list(&args.snr)?;
    if v.is_empty() {
        return Err(Error::config("--snr needs at least one value"));
    }
    Ok(v)
}

fn detectors(args: &DetectorArgs) -> Result<Vec<Detector>> {
    let kinds = parse_detector_list(&args.detectors)?;
    let threshold = match (args.rho, args.signal_power) {
        (Some(rho), Some(p)) => Some(ThresholdParams::new(rho, p)?),
        (None, None) => None,
        _ => return Err(Error::config("--rho and --signal-power go together")),
    };
    kinds
        .into_iter()
        .map(|k| Detector::from_kind(k, threshold))
        .collect()
}

fn axis_values(axis: SweepAxis, values: &Option<String>, args: &ScenarioArgs) -> Result<Vec<f64>> {
    match (values, axis) {
        (Some(text), _) => parse_value_list(text),
        (None, SweepAxis::SnrDb) => snr_list(args),
        (None, _) => Err(Error::config(format!(
            "--values is required for axis {axis}"
        ))),
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let config = match &cli.command {
            Command::Stats(a) => {
                let axis: SweepAxis = a.axis.parse()?;
                if !matches!(axis, SweepAxis::SnrDb | SweepAxis::SnapshotCount) {
                    return Err(Error::config("stats sweeps over snr or samples only"));
                }
                let snr = snr_list(&a.scenario)?;
                RunConfig {
                    command: CommandKind::Stats,
                    scenario: base_scenario(&a.scenario, snr[0])?,
                    axis,
                    axis_values: axis_values(axis, &a.values, &a.scenario)?,
                    detectors: Vec::new(),
                    trials: 1,
                    seed: a.scenario.seed,
                    out: a.scenario.out.clone(),
                    azimuth_policy: AzimuthPolicy::PerAxisValue,
                    execution: Execution::Serial,
                }
            }
            Command::Estimate(a) => {
                let snr = snr_list(&a.scenario)?;
                if snr.len() != 1 {
                    return Err(Error::config("estimate takes a single --snr value"));
                }
                RunConfig {
                    command: CommandKind::Estimate,
                    scenario: base_scenario(&a.scenario, snr[0])?,
                    axis: SweepAxis::SnrDb,
                    axis_values: snr,
                    detectors: detectors(&a.detectors)?,
                    trials: 1,
                    seed: a.scenario.seed,
                    out: a.scenario.out.clone(),
                    azimuth_policy: AzimuthPolicy::PerAxisValue,
                    execution: Execution::Serial,
                }
            }
            Command::Sweep(a) => {
                let axis: SweepAxis = a.axis.parse()?;
                let snr = snr_list(&a.scenario)?;
                RunConfig {
                    command: CommandKind::Sweep,
                    scenario: base_scenario(&a.scenario, snr[0])?,
                    axis,
                    axis_values: axis_values(axis, &a.values, &a.scenario)?,
                    detectors: detectors(&a.detectors)?,
                    trials: a.trials,
                    seed: a.scenario.seed,
                    out: a.scenario.out.clone(),
                    azimuth_policy: if a.redraw_azimuths {
                        AzimuthPolicy::RedrawPerTrial
                    } else {
                        AzimuthPolicy::PerAxisValue
                    },
                    execution: if a.serial {
                        Execution::Serial
                    } else {
                        Execution::Parallel
                    },
                }
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn sweep_spec(&self) -> SweepSpec {
        SweepSpec::new(
            self.scenario.clone(),
            self.axis,
            self.axis_values.clone(),
            self.detectors.clone(),
            self.trials,
            self.seed,
        )
        .with_azimuth_policy(self.azimuth_policy)
    }

    /// Everything that can be checked before computation starts.
    pub fn validate(&self) -> Result<()> {
        match self.command {
            CommandKind::Sweep => self.sweep_spec().scenarios().map(|_| ()),
            CommandKind::Stats => {
                if self.axis_values.is_empty() {
                    return Err(Error::config("stats needs at least one value"));
                }
                for &v in &self.axis_values {
                    let s = scenario_at(&self.scenario, self.axis, v)?;
                    if s.snapshot_count() < 2 {
                        return Err(Error::config("stats needs at least 2 samples"));
                    }
                }
                Ok(())
            }
            CommandKind::Estimate => {
                if self.detectors.is_empty() {
                    return Err(Error::config("no detectors selected"));
                }
                if self.scenario.source_count() == 0 {
                    if let Some(d) = self.detectors.iter().find(|d| !d.kind().can_report_zero()) {
                        return Err(Error::Precondition(format!(
                            "{} cannot report zero sources",
                            d.kind()
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Decision statistics for every sweep value, as CSV.
pub fn cmd_stats(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for (i, &value) in config.axis_values.iter().enumerate() {
        let scenario = scenario_at(&config.scenario, config.axis, value)?;
        let mut rng = trial_rng(config.seed, i, 0);
        rows.extend(decision_statistics(&scenario, value, &mut rng)?);
    }
    write_stats_csv(&rows, out)
}

fn join_trace(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// One line per detector: kind, estimate, selected index and trace.
pub fn cmd_estimate(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let mut rng = trial_rng(config.seed, 0, 0);
    let outcomes = run_trial(&config.scenario, &config.detectors, &mut rng)?;
    let io = |source| Error::Io {
        path: PathBuf::from("<output>"),
        source,
    };
    for o in outcomes {
        match &o.estimate {
            Ok(e) => writeln!(
                out,
                "detector={} k_hat={} selected_index={} trace={}",
                o.kind,
                e.source_count,
                e.selected_index,
                join_trace(&e.statistic_trace)
            ),
            Err(err) => writeln!(out, "detector={} error={}", o.kind, err),
        }
        .map_err(io)?;
    }
    Ok(())
}

/// Error-rate report as CSV.
pub fn cmd_sweep(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let report = run_sweep_with(&config.sweep_spec(), config.execution)?;
    report.write_csv(out)
}

/// Execute a validated configuration, writing to `--out` (atomically) or
/// to `stdout`.
pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let body = |w: &mut dyn Write| match config.command {
        CommandKind::Stats => cmd_stats(config, w),
        CommandKind::Estimate => cmd_estimate(config, w),
        CommandKind::Sweep => cmd_sweep(config, w),
    };
    match &config.out {
        Some(path) => write_atomic(path, body),
        None => body(stdout),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|config| run(&config, stdout));
    match result {
        Ok(()) => {
            let _ = stdout.flush();
            EXIT_OK
        }
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

/// Kinds selected by a detector list, for callers that only need labels.
pub fn selected_kinds(detectors: &[Detector]) -> Vec<DetectorKind> {
    detectors.iter().map(Detector::kind).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("sourcecount").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn defaults_mirror_reference_setup() {
        let cli = Cli::try_parse_from(["sourcecount", "sweep"]).unwrap();
        let c = RunConfig::from_cli(&cli).unwrap();
        assert_eq!(c.scenario.geometry().element_count(), 8);
        assert_eq!(c.scenario.source_count(), 2);
        assert_eq!(c.scenario.snapshot_count(), 1024);
        assert_eq!(c.trials, 10_000);
        assert_eq!(selected_kinds(&c.detectors), DetectorKind::MAIN.to_vec());
    }

    #[test]
    fn config_errors_exit_with_one() {
        for args in [
            vec!["sweep", "--elements", "2", "--sources", "2"],
            vec!["sweep", "--detectors", "music"],
            vec!["sweep", "--axis", "sources", "--values", "1,9"],
            vec!["sweep", "--detectors", "increment_threshold"],
            vec!["estimate", "--snr", "0,1"],
            vec!["estimate", "--sources", "0"],
            vec!["estimate", "--angles", "10,20", "--sources", "3"],
            vec!["sweep", "--bogus-flag"],
            vec!["stats", "--axis", "elements", "--values", "8"],
        ] {
            let (code, _, err) = run_args(&args);
            assert_eq!(code, EXIT_CONFIG, "{args:?}: {err}");
            assert!(!err.is_empty());
        }
    }

    #[test]
    fn io_errors_exit_with_two() {
        let (code, _, err) = run_args(&[
            "sweep",
            "--trials",
            "1",
            "--snr",
            "0",
            "--samples",
            "32",
            "--out",
            "/nonexistent-dir/x/report.csv",
        ]);
        assert_eq!(code, EXIT_RUNTIME);
        assert!(err.contains("/nonexistent-dir/x/report.csv"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("sweep"));
    }

    #[test]
    fn sweep_schema_one_row_per_detector() {
        let (code, out, err) =
            run_args(&["sweep", "--trials", "1", "--snr", "3", "--samples", "64"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(
            lines[0],
            "detector,axis,axis_value,trials,errors,error_rate_percent"
        );
        assert_eq!(lines.len(), 1 + 4);
    }

    #[test]
    fn stats_row_count() {
        let (code, out, err) = run_args(&["stats", "--snr", "-10,-7,-3,0", "--samples", "128"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert_eq!(out.lines().count(), 1 + 4 * 8);
    }

    #[test]
    fn threshold_detector_via_flags() {
        let (code, out, err) = run_args(&[
            "estimate",
            "--snr",
            "inf",
            "--detectors",
            "increment_threshold",
            "--rho",
            "1",
            "--signal-power",
            "1",
            "--samples",
            "64",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.starts_with("detector=increment_threshold k_hat="));
    }
}
