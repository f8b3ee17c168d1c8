//! Received-signal model for a uniform circular array (UCA).
//!
//! Snapshots follow `Y = A·S + W` with `A` the `M×K` steering matrix, `S`
//! the `K×N` QPSK symbol block and `W` circularly-symmetric complex white
//! Gaussian noise. One QPSK symbol per source per snapshot (narrowband).

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Default array radius in wavelengths.
///
/// At this radius the default two-source placement (10° and 190°) yields
/// nearly orthogonal steering vectors on an 8-element ring.
pub const DEFAULT_RADIUS: f64 = 0.46;

/// Azimuth of the first default source, in degrees.
pub const DEFAULT_FIRST_AZIMUTH_DEG: f64 = 10.0;

/// Geometry of a uniform circular array. The radius is in wavelengths, so
/// the carrier wavelength never appears separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    element_count: usize,
    radius: f64,
    element_azimuths: Vec<f64>,
}

impl ArrayGeometry {
    /// `element_count` elements uniformly spaced on the circle,
    /// `γ_m = 2πm/M`.
    pub fn uniform_circular(element_count: usize, radius: f64) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::config("element_count must be at least 1"));
        }
        let azimuths = (0..element_count)
            .map(|m| TAU * m as f64 / element_count as f64)
            .collect();
        Self::with_azimuths(radius, azimuths)
    }

    /// Geometry with explicit element azimuths (radians, each in `[0, 2π)`).
    pub fn with_azimuths(radius: f64, element_azimuths: Vec<f64>) -> Result<Self> {
        if element_azimuths.is_empty() {
            return Err(Error::config("element_count must be at least 1"));
        }
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::config(format!(
                "radius must be a nonnegative finite number of wavelengths, got {radius}"
            )));
        }
        if let Some(bad) = element_azimuths
            .iter()
            .find(|g| !(g.is_finite() && **g >= 0.0 && **g < TAU))
        {
            return Err(Error::config(format!(
                "element azimuth {bad} outside [0, 2π)"
            )));
        }
        Ok(Self {
            element_count: element_azimuths.len(),
            radius,
            element_azimuths,
        })
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn element_azimuths(&self) -> &[f64] {
        &self.element_azimuths
    }
}

/// Reference power against which the SNR is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrReference {
    /// SNR relative to the total received signal power per element. With
    /// `K` unit-power sources and unit-modulus steering this is `K`, so
    /// `σ² = K·10^(−SNR/10)`. Falls back to unit power when `K = 0`.
    #[default]
    TotalReceived,
    /// SNR relative to a single unit-power source: `σ² = 10^(−SNR/10)`.
    PerSource,
}

impl SnrReference {
    pub fn noise_variance(self, snr_db: f64, source_count: usize) -> f64 {
        let reference = match self {
            SnrReference::PerSource => 1.0,
            SnrReference::TotalReceived => source_count.max(1) as f64,
        };
        reference * 10f64.powf(-snr_db / 10.0)
    }
}

/// One simulated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    geometry: ArrayGeometry,
    source_azimuths: Vec<f64>,
    snapshot_count: usize,
    snr_db: f64,
    snr_reference: SnrReference,
}

impl Scenario {
    pub fn new(
        geometry: ArrayGeometry,
        source_azimuths: Vec<f64>,
        snapshot_count: usize,
        snr_db: f64,
    ) -> Result<Self> {
        let k = source_azimuths.len();
        let m = geometry.element_count();
        if k >= m {
            return Err(Error::config(format!(
                "source_count ({k}) must be smaller than element_count ({m})"
            )));
        }
        if snapshot_count == 0 {
            return Err(Error::config("snapshot_count must be at least 1"));
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::config(format!(
                "snr_db must be > -inf, got {snr_db}"
            )));
        }
        if let Some(bad) = source_azimuths.iter().find(|t| !t.is_finite()) {
            return Err(Error::config(format!("source azimuth {bad} is not finite")));
        }
        let wrapped: Vec<f64> = source_azimuths.iter().map(|t| t.rem_euclid(TAU)).collect();
        for i in 0..k {
            for j in 0..i {
                if wrapped[i] == wrapped[j] {
                    return Err(Error::config(format!(
                        "source azimuths must be pairwise distinct ({} repeats)",
                        source_azimuths[i]
                    )));
                }
            }
        }
        Ok(Self {
            geometry,
            source_azimuths,
            snapshot_count,
            snr_db,
            snr_reference: SnrReference::default(),
        })
    }

    /// Scenario with `source_count` sources at [`default_source_azimuths`].
    pub fn with_default_azimuths(
        geometry: ArrayGeometry,
        source_count: usize,
        snapshot_count: usize,
        snr_db: f64,
    ) -> Result<Self> {
        Self::new(
            geometry,
            default_source_azimuths(source_count),
            snapshot_count,
            snr_db,
        )
    }

    pub fn with_snr_reference(mut self, reference: SnrReference) -> Self {
        self.snr_reference = reference;
        self
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn source_count(&self) -> usize {
        self.source_azimuths.len()
    }

    pub fn source_azimuths(&self) -> &[f64] {
        &self.source_azimuths
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshot_count
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn snr_reference(&self) -> SnrReference {
        self.snr_reference
    }

    /// Per-entry noise variance `σ²`.
    pub fn noise_variance(&self) -> f64 {
        self.snr_reference
            .noise_variance(self.snr_db, self.source_count())
    }
}

/// `count` azimuths evenly spaced over the circle starting at 10°, in radians.
pub fn default_source_azimuths(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let deg = DEFAULT_FIRST_AZIMUTH_DEG + 360.0 * k as f64 / count as f64;
            deg.to_radians().rem_euclid(TAU)
        })
        .collect()
}

/// Received data block, `M` rows (elements) by `N` columns (snapshots).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<Complex64>,
}

impl SnapshotMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Self {
        Self { data }
    }

    /// Build from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::config(format!(
                "expected {} entries for a {rows}×{cols} block, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self::new(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn element_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn snapshot_count(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.data.map(|z| z * c))
    }
}

/// UCA response to a plane wave from azimuth `theta`:
/// `a_m = exp(i·2π·r·cos(θ − γ_m))`.
pub fn uca_steering_vector(geometry: &ArrayGeometry, theta: f64) -> DVector<Complex64> {
    let k = TAU * geometry.radius();
    DVector::from_iterator(
        geometry.element_count(),
        geometry
            .element_azimuths()
            .iter()
            .map(|g| Complex64::cis(k * (theta - g).cos())),
    )
}

/// `M×K` matrix whose columns are the steering vectors of `thetas`.
pub fn steering_matrix(geometry: &ArrayGeometry, thetas: &[f64]) -> Result<DMatrix<Complex64>> {
    if thetas.is_empty() {
        return Err(Error::NoSources);
    }
    Ok(uca_steering_matrix_unchecked(geometry, thetas))
}

fn uca_steering_matrix_unchecked(geometry: &ArrayGeometry, thetas: &[f64]) -> DMatrix<Complex64> {
    let columns: Vec<_> = thetas
        .iter()
        .map(|&t| uca_steering_vector(geometry, t))
        .collect();
    DMatrix::from_columns(&columns)
}

/// `K×N` block of independent, equiprobable QPSK symbols `(±1 ± i)/√2`.
pub fn generate_qpsk_symbols<R: Rng + ?Sized>(
    source_count: usize,
    snapshot_count: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill keeps the draw order tied to snapshot order.
    DMatrix::from_fn(source_count, snapshot_count, |_, _| {
        let bits: u32 = rng.random();
        let re = if bits & 1 == 0 { a } else { -a };
        let im = if bits & 2 == 0 { a } else { -a };
        Complex64::new(re, im)
    })
}

/// Draw one snapshot block for `scenario`.
///
/// Symbols are drawn before noise; with `σ² = 0` no noise samples are drawn.
pub fn synthesize_snapshots<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> SnapshotMatrix {
    let m = scenario.geometry().element_count();
    let n = scenario.snapshot_count();
    let mut y = if scenario.source_count() == 0 {
        DMatrix::zeros(m, n)
    } else {
        let a = uca_steering_matrix_unchecked(scenario.geometry(), scenario.source_azimuths());
        a * generate_qpsk_symbols(scenario.source_count(), n, rng)
    };
    let variance = scenario.noise_variance();
    if variance > 0.0 {
        let sd = (variance / 2.0).sqrt();
        for z in y.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += Complex64::new(sd * re, sd * im);
        }
    }
    SnapshotMatrix::new(y)
}

/// Degrees to radians, wrapped into `[0, 2π)`.
pub fn azimuth_from_degrees(deg: f64) -> f64 {
    (deg * PI / 180.0).rem_euclid(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_radius_steering_is_all_ones() {
        let g = ArrayGeometry::uniform_circular(4, 0.0).unwrap();
        for theta in [0.0, 1.0, 4.0] {
            let a = uca_steering_vector(&g, theta);
            assert!(a.iter().all(|z| close(*z, Complex64::new(1.0, 0.0))));
        }
    }

    #[test]
    fn quarter_wavelength_single_element() {
        let g = ArrayGeometry::with_azimuths(0.25, vec![0.0]).unwrap();
        let a = uca_steering_vector(&g, 0.0);
        assert!(close(a[0], Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn half_wavelength_two_elements() {
        let g = ArrayGeometry::with_azimuths(0.5, vec![0.0, PI]).unwrap();
        let a = uca_steering_vector(&g, 0.0);
        assert!(close(a[0], Complex64::new(-1.0, 0.0)));
        assert!(close(a[1], Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn steering_matrix_columns() {
        let g = ArrayGeometry::with_azimuths(0.5, vec![0.0, PI]).unwrap();
        let a = steering_matrix(&g, &[0.0, PI / 2.0]).unwrap();
        assert_eq!(a.shape(), (2, 2));
        let expected = [
            [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        for r in 0..2 {
            for c in 0..2 {
                assert!(
                    close(a[(r, c)], expected[r][c]),
                    "({r},{c}) = {}",
                    a[(r, c)]
                );
            }
        }

        let g8 = ArrayGeometry::uniform_circular(8, 0.44).unwrap();
        let single = steering_matrix(&g8, &[0.3]).unwrap();
        assert_eq!(single.column(0).into_owned(), uca_steering_vector(&g8, 0.3));

        let g0 = ArrayGeometry::uniform_circular(5, 0.0).unwrap();
        let ones = steering_matrix(&g0, &[0.1, 2.0, 3.0]).unwrap();
        assert!(ones.iter().all(|z| close(*z, Complex64::new(1.0, 0.0))));
    }

    #[test]
    fn steering_matrix_rejects_empty() {
        let g = ArrayGeometry::uniform_circular(4, 0.5).unwrap();
        assert!(matches!(steering_matrix(&g, &[]), Err(Error::NoSources)));
    }

    #[test]
    fn geometry_invariants() {
        assert!(ArrayGeometry::uniform_circular(0, 0.5).is_err());
        assert!(ArrayGeometry::uniform_circular(3, -0.1).is_err());
        assert!(ArrayGeometry::with_azimuths(0.5, vec![0.0, TAU]).is_err());
        let g = ArrayGeometry::uniform_circular(8, 0.5).unwrap();
        assert_eq!(g.element_azimuths().len(), 8);
        assert!((g.element_azimuths()[2] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn scenario_invariants() {
        let g = ArrayGeometry::uniform_circular(4, 0.5).unwrap();
        assert!(Scenario::with_default_azimuths(g.clone(), 4, 10, 0.0).is_err());
        assert!(Scenario::with_default_azimuths(g.clone(), 3, 0, 0.0).is_err());
        assert!(Scenario::new(g.clone(), vec![0.5, 0.5 + TAU], 10, 0.0).is_err());
        assert!(Scenario::with_default_azimuths(g.clone(), 0, 10, f64::NAN).is_err());
        assert!(Scenario::with_default_azimuths(g, 3, 10, f64::INFINITY).is_ok());
    }

    #[test]
    fn default_azimuths_are_evenly_spaced() {
        let az = default_source_azimuths(2);
        assert!((az[0] - 10f64.to_radians()).abs() < 1e-15);
        assert!((az[1] - 190f64.to_radians()).abs() < 1e-12);
        let az = default_source_azimuths(4);
        assert!((az[3] - 280f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn noise_variance_references() {
        assert_eq!(SnrReference::PerSource.noise_variance(0.0, 3), 1.0);
        assert!((SnrReference::TotalReceived.noise_variance(10.0, 2) - 0.2).abs() < 1e-15);
        assert_eq!(SnrReference::TotalReceived.noise_variance(0.0, 0), 1.0);
        assert_eq!(
            SnrReference::PerSource.noise_variance(f64::INFINITY, 2),
            0.0
        );
    }

    #[test]
    fn qpsk_symbols_are_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = generate_qpsk_symbols(3, 500, &mut rng);
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn qpsk_symbols_zero_mean_and_uncorrelated() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = generate_qpsk_symbols(1, n, &mut rng);
        let mean = s.iter().sum::<Complex64>() / n as f64;
        assert!(mean.norm() <= 0.02, "mean {mean}");

        let s = generate_qpsk_symbols(2, n, &mut rng);
        let xc = (0..n)
            .map(|t| s[(0, t)] * s[(1, t)].conj())
            .sum::<Complex64>()
            / n as f64;
        assert!(xc.norm() <= 0.02, "cross-correlation {xc}");
    }

    #[test]
    fn noiseless_noise_only_is_zero() {
        let g = ArrayGeometry::uniform_circular(4, 0.5).unwrap();
        let sc = Scenario::with_default_azimuths(g, 0, 16, f64::INFINITY).unwrap();
        let y = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(y.data().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn noiseless_equals_steering_times_symbols() {
        let g = ArrayGeometry::uniform_circular(6, 0.44).unwrap();
        let sc = Scenario::with_default_azimuths(g.clone(), 3, 32, f64::INFINITY).unwrap();
        let y = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(4));
        let a = steering_matrix(&g, sc.source_azimuths()).unwrap();
        let s = generate_qpsk_symbols(3, 32, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(y.data(), &(a * s));
    }

    #[test]
    fn noise_only_power_matches_variance() {
        let g = ArrayGeometry::uniform_circular(2, 0.5).unwrap();
        let n = 100_000;
        let sc = Scenario::with_default_azimuths(g, 0, n, 0.0).unwrap();
        let y = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(5));
        for row in 0..2 {
            let p = y.data().row(row).iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            assert!((p - 1.0).abs() <= 0.02, "row {row} power {p}");
        }
    }

    #[test]
    fn identical_seed_is_bit_identical() {
        let g = ArrayGeometry::uniform_circular(8, 0.44).unwrap();
        let sc = Scenario::with_default_azimuths(g, 2, 64, -3.0).unwrap();
        let a = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(9));
        let b = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_rank_is_source_count() {
        for (m, k) in [(4, 1), (4, 3), (6, 2), (8, 5)] {
            let g = ArrayGeometry::uniform_circular(m, 0.44).unwrap();
            let sc = Scenario::with_default_azimuths(g, k, 40, f64::INFINITY).unwrap();
            let y = synthesize_snapshots(&sc, &mut ChaCha8Rng::seed_from_u64(m as u64));
            let sv = y.data().clone().svd(false, false).singular_values;
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            assert!(sv[k - 1] > 1e-8, "M={m} K={k}: {sv:?}");
            assert!(
                sv[k..].iter().all(|s| *s < 1e-8 * sv[0]),
                "M={m} K={k}: {sv:?}"
            );
        }
    }
}
