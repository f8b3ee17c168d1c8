//! Second-order statistics of a snapshot block and their eigenvalues.
//!
//! All estimators normalize by `1/N`. Only eigenvalues leave this module;
//! eigenvectors are computed by the decomposition but not exposed.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::array_model::SnapshotMatrix;
use crate::{Error, Result};

/// Relative tolerance for the conjugate-symmetry check.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Smallest admissible diagonal entry when normalizing to correlation
/// coefficients.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates squareness and conjugate symmetry; asymmetry is measured
    /// relative to `max(1, max |h_ij|)`.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::config(format!(
                "expected a square matrix, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::config("matrix has non-finite entries"));
        }
        let asym = max_asymmetry(&data);
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if asym > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self { data })
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::config(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    /// Real diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing to
    /// absorb roundoff.
    fn from_product(data: DMatrix<Complex64>) -> Self {
        Self {
            data: symmetrize(&data),
        }
    }
}

fn max_asymmetry(data: &DMatrix<Complex64>) -> f64 {
    let n = data.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((data[(i, j)] - data[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(H + Hᴴ)/2`; exactly Hermitian in floating point.
fn symmetrize(data: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (data + data.adjoint()) * Complex64::new(0.5, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Ascending,
    Descending,
}

/// Real eigenvalues, sorted according to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    order: SortOrder,
}

impl EigenSpectrum {
    /// Sorts `values` into `order`. Rejects NaN and infinities.
    pub fn from_values(mut values: Vec<f64>, order: SortOrder) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(format!("eigenvalue {bad} is not finite")));
        }
        match order {
            SortOrder::Ascending => values.sort_by(f64::total_cmp),
            SortOrder::Descending => values.sort_by(|a, b| b.total_cmp(a)),
        }
        Ok(Self { values, order })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> SortOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same spectrum re-sorted into `order`.
    pub fn sorted(&self, order: SortOrder) -> Self {
        if order == self.order {
            return self.clone();
        }
        let mut values = self.values.clone();
        values.reverse();
        Self { values, order }
    }

    pub fn ascending(&self) -> Vec<f64> {
        self.sorted(SortOrder::Ascending).values
    }

    pub fn descending(&self) -> Vec<f64> {
        self.sorted(SortOrder::Descending).values
    }

    /// Every eigenvalue multiplied by `c`. Requires `c > 0` so the order is
    /// preserved.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::config(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Self::from_values(self.values.iter().map(|v| v * c).collect(), self.order)
    }
}

/// `R = (1/N)·Y·Yᴴ`.
pub fn sample_autocovariance(y: &SnapshotMatrix) -> HermitianMatrix {
    let n = y.snapshot_count().max(1) as f64;
    let data = y.data();
    HermitianMatrix::from_product(data * data.adjoint() / Complex64::new(n, 0.0))
}

/// `V = (1/N)·(Y − μ)(Y − μ)ᴴ` with `μ` the per-element sample mean.
pub fn sample_centered_covariance(y: &SnapshotMatrix) -> Result<HermitianMatrix> {
    let n = y.snapshot_count();
    if n < 2 {
        return Err(Error::InsufficientSnapshots(n));
    }
    let mut centered = y.data().clone();
    for mut row in centered.row_iter_mut() {
        let mean = row.iter().sum::<Complex64>() / n as f64;
        row.iter_mut().for_each(|z| *z -= mean);
    }
    Ok(HermitianMatrix::from_product(
        &centered * centered.adjoint() / Complex64::new(n as f64, 0.0),
    ))
}

/// `C = D^(−1/2)·V·D^(−1/2)` with `D = diag(V)`. The diagonal of the
/// result is exactly one.
pub fn correlation_coefficient_matrix(v: &HermitianMatrix) -> Result<HermitianMatrix> {
    let diag = v.diagonal();
    if let Some((element, &variance)) = diag
        .iter()
        .enumerate()
        .find(|(_, d)| d.is_nan() || **d <= VARIANCE_FLOOR)
    {
        return Err(Error::DegenerateVariance { element, variance });
    }
    let inv_sd: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    let dim = v.dim();
    let data = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            v.get(i, j) * (inv_sd[i] * inv_sd[j])
        }
    });
    Ok(HermitianMatrix::from_product(data))
}

/// Full Hermitian eigendecomposition after symmetrization. Returns the
/// unsorted eigenvalues and the unitary eigenvector matrix.
pub(crate) fn hermitian_evd(h: &HermitianMatrix) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(symmetrize(h.data()));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// All eigenvalues of `h`, sorted per `order`.
pub fn eigenvalues_sorted(h: &HermitianMatrix, order: SortOrder) -> Result<EigenSpectrum> {
    let asym = max_asymmetry(h.data());
    let scale = h.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    if asym > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian(asym));
    }
    let (values, _) = hermitian_evd(h);
    EigenSpectrum::from_values(values, order)
}
