//! Source-count detectors over an eigenvalue spectrum.
//!
//! Two families:
//!
//! * information criteria (AIC, MDL), minimized over the candidate order
//!   `k` using the descending spectrum of the auto-covariance matrix;
//! * increment statistics over the ascending spectrum, where the largest
//!   jump marks the boundary between noise and signal eigenvalues. For an
//!   ascending spectrum `λ_1 ≤ … ≤ λ_M` and a selected 1-based index `j`,
//!   the estimate is `K̂ = M − j + 1`.
//!
//! Ties resolve to the smallest index everywhere.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::spectral::EigenSpectrum;
use crate::{Error, Result};

/// Eigenvalues at or below this are clamped before taking logarithms.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Aic,
    Mdl,
    MovingIncrement,
    MovingStd,
    IncrementThreshold,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Aic,
        DetectorKind::Mdl,
        DetectorKind::MovingIncrement,
        DetectorKind::MovingStd,
        DetectorKind::IncrementThreshold,
    ];

    /// The four detectors that need no tuning parameters.
    pub const MAIN: [DetectorKind; 4] = [
        DetectorKind::Aic,
        DetectorKind::Mdl,
        DetectorKind::MovingIncrement,
        DetectorKind::MovingStd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Aic => "aic",
            DetectorKind::Mdl => "mdl",
            DetectorKind::MovingIncrement => "moving_increment",
            DetectorKind::MovingStd => "moving_std",
            DetectorKind::IncrementThreshold => "increment_threshold",
        }
    }

    /// Argmax detectors cannot report zero sources.
    pub fn can_report_zero(self) -> bool {
        !matches!(
            self,
            DetectorKind::MovingIncrement | DetectorKind::MovingStd
        )
    }

    /// Whether the detector consumes correlation-coefficient eigenvalues
    /// (as opposed to auto-covariance eigenvalues).
    pub fn uses_correlation_spectrum(self) -> bool {
        matches!(
            self,
            DetectorKind::MovingIncrement
                | DetectorKind::MovingStd
                | DetectorKind::IncrementThreshold
        )
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "aic" => Ok(DetectorKind::Aic),
            "mdl" => Ok(DetectorKind::Mdl),
            "moving_increment" | "mi" => Ok(DetectorKind::MovingIncrement),
            "moving_std" | "ms" => Ok(DetectorKind::MovingStd),
            "increment_threshold" | "threshold" => Ok(DetectorKind::IncrementThreshold),
            other => Err(Error::Parse(format!("unknown detector {other:?}"))),
        }
    }
}

/// Parameters of the increment-threshold baseline,
/// `γ_inc = ρ·P_s / (1 + √(P_s/λ_min))²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    rho: f64,
    signal_power: f64,
}

impl ThresholdParams {
    pub fn new(rho: f64, signal_power: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::config(format!("rho must be positive, got {rho}")));
        }
        if !(signal_power > 0.0 && signal_power.is_finite()) {
            return Err(Error::config(format!(
                "signal power must be positive, got {signal_power}"
            )));
        }
        Ok(Self { rho, signal_power })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn signal_power(&self) -> f64 {
        self.signal_power
    }

    pub fn threshold(&self, smallest_eigenvalue: f64) -> f64 {
        let lambda = smallest_eigenvalue.max(EIGENVALUE_FLOOR);
        let denom = 1.0 + (self.signal_power / lambda).sqrt();
        self.rho * self.signal_power / (denom * denom)
    }
}

/// A configured detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    Aic,
    Mdl,
    MovingIncrement,
    MovingStd,
    IncrementThreshold(ThresholdParams),
}

impl Detector {
    pub fn kind(&self) -> DetectorKind {
        match self {
            Detector::Aic => DetectorKind::Aic,
            Detector::Mdl => DetectorKind::Mdl,
            Detector::MovingIncrement => DetectorKind::MovingIncrement,
            Detector::MovingStd => DetectorKind::MovingStd,
            Detector::IncrementThreshold(_) => DetectorKind::IncrementThreshold,
        }
    }

    /// Build from a kind; `threshold` is required for the threshold detector.
    pub fn from_kind(kind: DetectorKind, threshold: Option<ThresholdParams>) -> Result<Self> {
        Ok(match kind {
            DetectorKind::Aic => Detector::Aic,
            DetectorKind::Mdl => Detector::Mdl,
            DetectorKind::MovingIncrement => Detector::MovingIncrement,
            DetectorKind::MovingStd => Detector::MovingStd,
            DetectorKind::IncrementThreshold => {
                Detector::IncrementThreshold(threshold.ok_or_else(|| {
                    Error::config("increment_threshold needs rho and signal power")
                })?)
            }
        })
    }

    /// Run on `spectrum`. `snapshot_count` is only used by AIC and MDL.
    pub fn estimate(&self, spectrum: &EigenSpectrum, snapshot_count: usize) -> Result<Estimate> {
        match self {
            Detector::Aic => aic(spectrum, snapshot_count),
            Detector::Mdl => mdl(spectrum, snapshot_count),
            Detector::MovingIncrement => moving_increment(spectrum),
            Detector::MovingStd => moving_std(spectrum),
            Detector::IncrementThreshold(p) => increment_threshold(spectrum, p),
        }
    }
}

/// Output of a detector.
///
/// `selected_index` is the minimizing order `k` for AIC/MDL and the 1-based
/// ascending index `j` for the increment statistics. When the threshold
/// detector finds no crossing it reports `j = M + 1`, keeping
/// `K̂ = M − j + 1 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub kind: DetectorKind,
    pub source_count: usize,
    pub selected_index: usize,
    /// Criterion values for `k = 0..M−1` (AIC/MDL), `δ_2..δ_M` (moving
    /// increment, threshold) or `α_3..α_M` (moving STD).
    pub statistic_trace: Vec<f64>,
}

/// Log-likelihood term `−(M−k)·N·log(GM/AM)` of the `M−k` smallest
/// eigenvalues. `descending` must already be clamped.
fn likelihood_term(descending: &[f64], k: usize, snapshots: f64) -> f64 {
    let tail = &descending[k..];
    if tail.len() < 2 {
        return 0.0;
    }
    let p = tail.len() as f64;
    let mean_log = tail.iter().map(|l| l.ln()).sum::<f64>() / p;
    let log_mean = (tail.iter().sum::<f64>() / p).ln();
    // AM ≥ GM; clamp roundoff so the term stays nonnegative.
    (p * snapshots * (log_mean - mean_log)).max(0.0)
}

fn clamped_descending(spectrum: &EigenSpectrum) -> Vec<f64> {
    spectrum
        .descending()
        .into_iter()
        .map(|l| l.max(EIGENVALUE_FLOOR))
        .collect()
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn criterion(
    kind: DetectorKind,
    spectrum: &EigenSpectrum,
    snapshot_count: usize,
    penalty: impl Fn(f64, f64) -> f64,
    likelihood_weight: f64,
) -> Result<Estimate> {
    let m = spectrum.len();
    if m == 0 {
        return Err(Error::TooFewEigenvalues { needed: 1, got: 0 });
    }
    if snapshot_count == 0 {
        return Err(Error::Precondition(
            "snapshot count must be at least 1".into(),
        ));
    }
    let desc = clamped_descending(spectrum);
    let n = snapshot_count as f64;
    let trace: Vec<f64> = (0..m)
        .map(|k| likelihood_weight * likelihood_term(&desc, k, n) + penalty(k as f64, m as f64))
        .collect();
    let k = argmin(&trace);
    Ok(Estimate {
        kind,
        source_count: k,
        selected_index: k,
        statistic_trace: trace,
    })
}

/// Akaike information criterion:
/// `AIC(k) = −2·(M−k)·N·log(GM_k/AM_k) + 2k(2M−k)`.
pub fn aic(spectrum: &EigenSpectrum, snapshot_count: usize) -> Result<Estimate> {
    criterion(
        DetectorKind::Aic,
        spectrum,
        snapshot_count,
        |k, m| 2.0 * k * (2.0 * m - k),
        2.0,
    )
}

/// Minimum description length:
/// `MDL(k) = −(M−k)·N·log(GM_k/AM_k) + ½·k(2M−k)·log N`.
pub fn mdl(spectrum: &EigenSpectrum, snapshot_count: usize) -> Result<Estimate> {
    let log_n = (snapshot_count.max(1) as f64).ln();
    criterion(
        DetectorKind::Mdl,
        spectrum,
        snapshot_count,
        move |k, m| 0.5 * k * (2.0 * m - k) * log_n,
        1.0,
    )
}

/// `δ_i = λ_i − λ_{i−1}` for `i = 2..M` over the ascending spectrum.
pub fn increments(ascending: &[f64]) -> Vec<f64> {
    ascending.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Biased standard deviation of two samples, `√((a−u)² + (b−u)²)` with `u`
/// their mean.
pub fn two_point_std(a: f64, b: f64) -> f64 {
    let u = 0.5 * (a + b);
    ((a - u).powi(2) + (b - u).powi(2)).sqrt()
}

/// Moving increment: `j = argmax_i δ_i`, `K̂ = M − j + 1`.
pub fn moving_increment(spectrum: &EigenSpectrum) -> Result<Estimate> {
    let m = spectrum.len();
    if m < 2 {
        return Err(Error::TooFewEigenvalues { needed: 2, got: m });
    }
    let delta = increments(&spectrum.ascending());
    // delta[0] is δ_2
    let j = argmax(&delta) + 2;
    Ok(Estimate {
        kind: DetectorKind::MovingIncrement,
        source_count: m + 1 - j,
        selected_index: j,
        statistic_trace: delta,
    })
}

/// Moving standard deviation: `α_i = STD(i) − STD(i−1)` for `i = 3..M`,
/// with `STD(i)` the two-point STD of `(λ_{i−1}, λ_i)`; `j = argmax_i α_i`,
/// `K̂ = M − j + 1`.
pub fn moving_std(spectrum: &EigenSpectrum) -> Result<Estimate> {
    let m = spectrum.len();
    if m < 3 {
        return Err(Error::TooFewEigenvalues { needed: 3, got: m });
    }
    let asc = spectrum.ascending();
    let stds: Vec<f64> = asc.windows(2).map(|w| two_point_std(w[1], w[0])).collect();
    let alpha: Vec<f64> = stds.windows(2).map(|w| w[1] - w[0]).collect();
    // alpha[0] is α_3
    let j = argmax(&alpha) + 3;
    Ok(Estimate {
        kind: DetectorKind::MovingStd,
        source_count: m + 1 - j,
        selected_index: j,
        statistic_trace: alpha,
    })
}

/// Increment-threshold baseline: the first `δ_i` above `γ_inc` selects
/// `j`; no crossing means no sources.
pub fn increment_threshold(spectrum: &EigenSpectrum, params: &ThresholdParams) -> Result<Estimate> {
    let m = spectrum.len();
    if m < 2 {
        return Err(Error::TooFewEigenvalues { needed: 2, got: m });
    }
    let asc = spectrum.ascending();
    let gamma = params.threshold(asc[0]);
    let delta = increments(&asc);
    let j = delta
        .iter()
        .position(|d| *d > gamma)
        .map_or(m + 1, |i| i + 2);
    Ok(Estimate {
        kind: DetectorKind::IncrementThreshold,
        source_count: m + 1 - j,
        selected_index: j,
        statistic_trace: delta,
    })
}
