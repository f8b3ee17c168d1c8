//! Seeded Monte Carlo trials and parameter sweeps.
//!
//! Every trial owns a random stream derived from
//! `(master_seed, axis_index, trial_index)`: the master seed keys a ChaCha8
//! generator, the axis index selects its stream and the trial index a
//! disjoint window of its counter. Aggregation only sums integer counts, so
//! the report does not depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{synthesize_snapshots, ArrayGeometry, Scenario, SnapshotMatrix};
use crate::detectors::{increments, moving_std, Detector, DetectorKind, Estimate};
use crate::report::{ErrorRateReport, ReportRow, StatsRow};
use crate::spectral::{
    correlation_coefficient_matrix, eigenvalues_sorted, sample_autocovariance,
    sample_centered_covariance, EigenSpectrum, SortOrder,
};
use crate::{Error, Result};

/// Words of the ChaCha counter reserved for each trial.
const TRIAL_WINDOW_BITS: u32 = 40;

/// Random stream for one trial.
pub fn trial_rng(master_seed: u64, axis_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(axis_index as u64);
    rng.set_word_pos((trial_index as u128) << TRIAL_WINDOW_BITS);
    rng
}

/// `100·(1 − successes/runs)`.
pub fn error_rate(successes: u64, runs: u64) -> Result<f64> {
    if runs == 0 {
        return Err(Error::Precondition(
            "error rate needs at least one run".into(),
        ));
    }
    if successes > runs {
        return Err(Error::Precondition(format!(
            "successes ({successes}) exceed runs ({runs})"
        )));
    }
    Ok(100.0 * (1.0 - successes as f64 / runs as f64))
}

/// Eigenvalue spectra of one snapshot block.
#[derive(Debug)]
pub struct TrialSpectra {
    /// Correlation-coefficient eigenvalues, ascending.
    pub correlation: Result<EigenSpectrum>,
    /// Auto-covariance eigenvalues, descending.
    pub covariance: Result<EigenSpectrum>,
}

impl TrialSpectra {
    pub fn from_snapshots(y: &SnapshotMatrix) -> Self {
        let correlation = sample_centered_covariance(y)
            .and_then(|v| correlation_coefficient_matrix(&v))
            .and_then(|c| eigenvalues_sorted(&c, SortOrder::Ascending));
        let covariance = eigenvalues_sorted(&sample_autocovariance(y), SortOrder::Descending);
        Self {
            correlation,
            covariance,
        }
    }
}

/// Result of one detector on one trial. A detector error counts as a miss.
#[derive(Debug)]
pub struct DetectorOutcome {
    pub kind: DetectorKind,
    pub estimate: Result<Estimate>,
    pub correct: bool,
}

fn check_detectors_support(scenario: &Scenario, detectors: &[Detector]) -> Result<()> {
    if scenario.source_count() == 0 {
        if let Some(d) = detectors.iter().find(|d| !d.kind().can_report_zero()) {
            return Err(Error::Precondition(format!(
                "{} cannot report zero sources; source_count must be at least 1",
                d.kind()
            )));
        }
    }
    Ok(())
}

fn apply_detectors(
    spectra: &TrialSpectra,
    detectors: &[Detector],
    snapshot_count: usize,
    truth: usize,
) -> Vec<DetectorOutcome> {
    detectors
        .iter()
        .map(|d| {
            let spectrum = if d.kind().uses_correlation_spectrum() {
                &spectra.correlation
            } else {
                &spectra.covariance
            };
            let estimate = match spectrum {
                Ok(s) => d.estimate(s, snapshot_count),
                Err(e) => Err(Error::Precondition(format!("spectrum unavailable: {e}"))),
            };
            let correct = matches!(&estimate, Ok(e) if e.source_count == truth);
            DetectorOutcome {
                kind: d.kind(),
                estimate,
                correct,
            }
        })
        .collect()
}

/// Synthesize one block and run every detector on it. Correlation-based
/// detectors and the information criteria see the same snapshots.
pub fn run_trial<R: Rng + ?Sized>(
    scenario: &Scenario,
    detectors: &[Detector],
    rng: &mut R,
) -> Result<Vec<DetectorOutcome>> {
    check_detectors_support(scenario, detectors)?;
    let y = synthesize_snapshots(scenario, rng);
    let spectra = TrialSpectra::from_snapshots(&y);
    Ok(apply_detectors(
        &spectra,
        detectors,
        scenario.snapshot_count(),
        scenario.source_count(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    SnapshotCount,
    SourceCount,
    ElementCount,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::SnapshotCount => "snapshot_count",
            SweepAxis::SourceCount => "source_count",
            SweepAxis::ElementCount => "element_count",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "snr" | "snr_db" => Ok(SweepAxis::SnrDb),
            "samples" | "snapshots" | "snapshot_count" => Ok(SweepAxis::SnapshotCount),
            "sources" | "source_count" => Ok(SweepAxis::SourceCount),
            "elements" | "element_count" => Ok(SweepAxis::ElementCount),
            other => Err(Error::Parse(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// How source azimuths are chosen inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AzimuthPolicy {
    /// Fixed for all trials of an axis value: the base scenario's azimuths,
    /// or the default even spacing when the axis changes the source count.
    #[default]
    PerAxisValue,
    /// `K` azimuths drawn uniformly from each trial's own stream.
    RedrawPerTrial,
}

/// Substitute `value` for `axis` in `base`.
pub fn scenario_at(base: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario> {
    let invalid = |reason: String| Error::InvalidAxisValue {
        axis: axis.to_string(),
        value,
        reason,
    };
    let as_count = |min: usize| -> Result<usize> {
        if value.is_finite()
            && value.fract() == 0.0
            && value >= min as f64
            && value <= u32::MAX as f64
        {
            Ok(value as usize)
        } else {
            Err(invalid(format!("expected an integer ≥ {min}")))
        }
    };
    let geometry = base.geometry().clone();
    let built = match axis {
        SweepAxis::SnrDb => Scenario::new(
            geometry,
            base.source_azimuths().to_vec(),
            base.snapshot_count(),
            value,
        ),
        SweepAxis::SnapshotCount => Scenario::new(
            geometry,
            base.source_azimuths().to_vec(),
            as_count(1)?,
            base.snr_db(),
        ),
        SweepAxis::SourceCount => {
            let k = as_count(0)?;
            if k == base.source_count() {
                Ok(base.clone())
            } else {
                Scenario::with_default_azimuths(geometry, k, base.snapshot_count(), base.snr_db())
            }
        }
        SweepAxis::ElementCount => {
            let m = as_count(1)?;
            ArrayGeometry::uniform_circular(m, base.geometry().radius()).and_then(|g| {
                Scenario::new(
                    g,
                    base.source_azimuths().to_vec(),
                    base.snapshot_count(),
                    base.snr_db(),
                )
            })
        }
    };
    built
        .map(|s| s.with_snr_reference(base.snr_reference()))
        .map_err(|e| match e {
            Error::InvalidAxisValue { .. } => e,
            other => invalid(other.to_string()),
        })
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base_scenario: Scenario,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub detectors: Vec<Detector>,
    pub trials: usize,
    pub master_seed: u64,
    pub azimuth_policy: AzimuthPolicy,
}

impl SweepSpec {
    pub fn new(
        base_scenario: Scenario,
        axis: SweepAxis,
        axis_values: Vec<f64>,
        detectors: Vec<Detector>,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            base_scenario,
            axis,
            axis_values,
            detectors,
            trials,
            master_seed,
            azimuth_policy: AzimuthPolicy::default(),
        }
    }

    pub fn with_azimuth_policy(mut self, policy: AzimuthPolicy) -> Self {
        self.azimuth_policy = policy;
        self
    }

    /// One validated scenario per axis value.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        if self.axis_values.is_empty() {
            return Err(Error::config("sweep needs at least one axis value"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.detectors.is_empty() {
            return Err(Error::config("sweep needs at least one detector"));
        }
        self.axis_values
            .iter()
            .map(|&v| {
                let s = scenario_at(&self.base_scenario, self.axis, v)?;
                check_detectors_support(&s, &self.detectors)?;
                Ok(s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn redraw_azimuths<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Scenario {
    loop {
        let az: Vec<f64> = (0..scenario.source_count())
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        if let Ok(s) = Scenario::new(
            scenario.geometry().clone(),
            az,
            scenario.snapshot_count(),
            scenario.snr_db(),
        ) {
            return s.with_snr_reference(scenario.snr_reference());
        }
    }
}

fn trial_successes(
    spec: &SweepSpec,
    scenario: &Scenario,
    axis_index: usize,
    trial: usize,
) -> Vec<u64> {
    let mut rng = trial_rng(spec.master_seed, axis_index, trial);
    let redrawn;
    let scenario = match spec.azimuth_policy {
        AzimuthPolicy::PerAxisValue => scenario,
        AzimuthPolicy::RedrawPerTrial => {
            redrawn = redraw_azimuths(scenario, &mut rng);
            &redrawn
        }
    };
    let y = synthesize_snapshots(scenario, &mut rng);
    let spectra = TrialSpectra::from_snapshots(&y);
    apply_detectors(
        &spectra,
        &spec.detectors,
        scenario.snapshot_count(),
        scenario.source_count(),
    )
    .iter()
    .map(|o| u64::from(o.correct))
    .collect()
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Run every trial of `spec` in parallel.
pub fn run_sweep(spec: &SweepSpec) -> Result<ErrorRateReport> {
    run_sweep_with(spec, Execution::Parallel)
}

pub fn run_sweep_with(spec: &SweepSpec, execution: Execution) -> Result<ErrorRateReport> {
    let scenarios = spec.scenarios()?;
    let d = spec.detectors.len();
    let successes: Vec<Vec<u64>> = scenarios
        .iter()
        .enumerate()
        .map(|(axis_index, scenario)| {
            let one = |t| trial_successes(spec, scenario, axis_index, t);
            match execution {
                Execution::Serial => (0..spec.trials).map(one).fold(vec![0; d], add_counts),
                Execution::Parallel => (0..spec.trials)
                    .into_par_iter()
                    .map(one)
                    .reduce(|| vec![0; d], add_counts),
            }
        })
        .collect();

    let trials = spec.trials as u64;
    let mut rows = Vec::with_capacity(d * scenarios.len());
    for (di, detector) in spec.detectors.iter().enumerate() {
        for (ai, &value) in spec.axis_values.iter().enumerate() {
            let ok = successes[ai][di];
            rows.push(ReportRow {
                detector: detector.kind(),
                axis: spec.axis,
                axis_value: value,
                trials,
                errors: trials - ok,
                error_rate_percent: error_rate(ok, trials)?,
            });
        }
    }
    Ok(ErrorRateReport { rows })
}

/// Per-index decision statistics for one snapshot block, on both the
/// correlation-coefficient and the auto-covariance spectra (ascending).
pub fn decision_statistics<R: Rng + ?Sized>(
    scenario: &Scenario,
    sweep_value: f64,
    rng: &mut R,
) -> Result<Vec<StatsRow>> {
    let y = synthesize_snapshots(scenario, rng);
    let corr = sample_centered_covariance(&y)
        .and_then(|v| correlation_coefficient_matrix(&v))
        .and_then(|c| eigenvalues_sorted(&c, SortOrder::Ascending))?;
    let cov = eigenvalues_sorted(&sample_autocovariance(&y), SortOrder::Ascending)?;

    let columns = |s: &EigenSpectrum| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let lambda = s.ascending();
        let delta = increments(&lambda);
        let alpha = if lambda.len() >= 3 {
            moving_std(s)?.statistic_trace
        } else {
            Vec::new()
        };
        Ok((lambda, delta, alpha))
    };
    let (lc, dc, ac) = columns(&corr)?;
    let (lv, dv, av) = columns(&cov)?;
    // 1-based index i: δ_i lives at i−2, α_i at i−3.
    let at =
        |v: &[f64], i: usize, offset: usize| i.checked_sub(offset).and_then(|p| v.get(p)).copied();
    Ok((1..=lc.len())
        .map(|i| StatsRow {
            sweep_value,
            index: i,
            lambda_corr: lc[i - 1],
            delta_corr: at(&dc, i, 2),
            alpha_corr: at(&ac, i, 3),
            lambda_cov: lv[i - 1],
            delta_cov: at(&dv, i, 2),
            alpha_cov: at(&av, i, 3),
        })
        .collect())
}
