//! Finite-N spectra of `XY*` and `XY+` and their comparison with the
//! predicted supports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Dims, EnsembleParams, MatrixPair};
use crate::error::{Error, Result};
use crate::matalg::{self, default_rtol};
use crate::predict::{support_contains, ProductKind, Support};

#[derive(Debug, Clone)]
pub struct SpectrumSample {
    pub eigs: Vec<Complex64>,
    pub product_kind: ProductKind,
    pub dims: Dims,
    pub params: EnsembleParams,
    pub seed: u64,
}

impl SpectrumSample {
    /// `trace(M) / N`.
    pub fn mean(&self) -> Complex64 {
        self.eigs.iter().sum::<Complex64>() / self.eigs.len() as f64
    }
}

/// Eigenvalues of `X Y*` or `X Y+` for one sampled pair.
pub fn spectrum(pair: &MatrixPair, product_kind: ProductKind) -> Result<SpectrumSample> {
    let m = product_matrix(pair, product_kind)?;
    Ok(SpectrumSample {
        eigs: matalg::eigenvalues(m.as_ref())?,
        product_kind,
        dims: pair.dims,
        params: pair.params,
        seed: pair.seed,
    })
}

pub fn product_matrix(pair: &MatrixPair, product_kind: ProductKind) -> Result<matalg::CMat> {
    match product_kind {
        ProductKind::ConjTranspose => matalg::mul_adjoint(pair.x_mat.as_ref(), pair.y_mat.as_ref()),
        ProductKind::PseudoInverse => {
            let y = pair.y_mat.as_ref();
            let pinv = matalg::pseudo_inverse(y, default_rtol(y.nrows(), y.ncols()))?;
            matalg::matmul(pair.x_mat.as_ref(), pinv.pinv.as_ref())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub passed: bool,
    /// Largest matched distance divided by the spectral scale (largest modulus).
    pub max_mismatch: f64,
}

/// Compares the spectrum of the larger product with the spectrum of the
/// smaller one padded by zeros, `det(x I - AB) = x^{m-n} det(x I - BA)`.
pub fn match_with_zero_padding(larger: &[Complex64], smaller: &[Complex64], tol: f64) -> IdentityCheck {
    if smaller.len() > larger.len() {
        return IdentityCheck { passed: false, max_mismatch: f64::INFINITY };
    }
    let mut padded = smaller.to_vec();
    padded.resize(larger.len(), Complex64::new(0.0, 0.0));
    let scale = larger.iter().chain(smaller).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    match matalg::match_multisets(larger, &padded) {
        Some(dist) => {
            let max_mismatch = dist / scale;
            IdentityCheck { passed: max_mismatch <= tol, max_mismatch }
        }
        None => IdentityCheck { passed: false, max_mismatch: f64::INFINITY },
    }
}

/// Checks that `eigs(X Y*)` equals `eigs(Y* X)` plus `N - P` zeros (roles
/// swapped when `P > N`), to within `tol` relative to the spectral scale.
pub fn wa_identity_check(pair: &MatrixPair, tol: f64) -> Result<IdentityCheck> {
    let (x, y) = (pair.x_mat.as_ref(), pair.y_mat.as_ref());
    let outer = matalg::eigenvalues(matalg::mul_adjoint(x, y)?.as_ref())?;
    let inner = matalg::eigenvalues(matalg::adjoint_mul(y, x)?.as_ref())?;
    Ok(if outer.len() >= inner.len() {
        match_with_zero_padding(&outer, &inner, tol)
    } else {
        match_with_zero_padding(&inner, &outer, tol)
    })
}

/// How eigenvalues are classified as numerically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroTolPolicy {
    /// `factor * median |lambda|` over eigenvalues above `1e-6 * max |lambda|`.
    Relative {
        factor: f64,
    },
    Absolute {
        tol: f64,
    },
}

impl Default for ZeroTolPolicy {
    fn default() -> Self {
        ZeroTolPolicy::Relative { factor: 1e-8 }
    }
}

impl ZeroTolPolicy {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            ZeroTolPolicy::Relative { factor } => factor,
            ZeroTolPolicy::Absolute { tol } => tol,
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("zero tolerance must be finite and positive, got {v}")))
        }
    }

    pub fn resolve(&self, eigs: &[Complex64]) -> f64 {
        match *self {
            ZeroTolPolicy::Absolute { tol } => tol,
            ZeroTolPolicy::Relative { factor } => factor * spectral_scale(eigs),
        }
    }
}

/// Median modulus of the eigenvalues that are not at the numerical-noise level.
pub fn spectral_scale(eigs: &[Complex64]) -> f64 {
    let max = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).filter(|&r| r > 1e-6 * max).collect();
    if moduli.is_empty() {
        return f64::MIN_POSITIVE;
    }
    moduli.sort_by(f64::total_cmp);
    let mid = moduli.len() / 2;
    if moduli.len() % 2 == 1 {
        moduli[mid]
    } else {
        0.5 * (moduli[mid - 1] + moduli[mid])
    }
}

pub fn count_zeros(eigs: &[Complex64], zero_tol: f64) -> usize {
    eigs.iter().filter(|z| z.norm() <= zero_tol).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total: usize,
    pub inside_fraction: f64,
    pub outlier_count: usize,
    /// Largest `normalized_radius - (1 + margin)` over outliers, 0 if none.
    pub max_excess: f64,
    pub zero_count: usize,
}

/// Classifies each eigenvalue against the margin-dilated support. Eigenvalues
/// within `zero_tol` of the origin are counted in `zero_count` and are inside
/// when the support carries a zero atom (otherwise they are judged by the
/// geometry like any other point).
pub fn coverage(sample: &SpectrumSample, support: &Support, margin: f64, zero_tol: f64) -> CoverageReport {
    coverage_of(&sample.eigs, support, margin, zero_tol)
}

pub fn coverage_of(eigs: &[Complex64], support: &Support, margin: f64, zero_tol: f64) -> CoverageReport {
    let mut zero_count = 0;
    let mut outlier_count = 0;
    let mut max_excess = 0.0f64;
    for &z in eigs {
        if z.norm() <= zero_tol {
            zero_count += 1;
            if support.zero_atom() {
                continue;
            }
        }
        if !support_contains(support, z, margin) {
            outlier_count += 1;
            max_excess = max_excess.max(support.normalized_radius(z) - (1.0 + margin));
        }
    }
    let total = eigs.len();
    let inside_fraction = if total == 0 { 1.0 } else { 1.0 - outlier_count as f64 / total as f64 };
    CoverageReport { total, inside_fraction, outlier_count, max_excess, zero_count }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite())
            && self.re_max > self.re_min
            && self.im_max > self.im_min;
        if ok {
            Ok(())
        } else {
            Err(Error::DegenerateWindow)
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// `counts[iy][ix]`; row 0 is the bottom (`im_min`) edge.
    pub counts: Vec<Vec<u64>>,
}

impl DensityGrid {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// 2-D histogram of eigenvalues over `window`. Cells are half-open except the
/// last row and column, which include the upper window edge.
pub fn density_grid<'a>(
    eigs: impl IntoIterator<Item = &'a Complex64>,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<DensityGrid> {
    window.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidConfig(format!("density grid needs at least one bin per axis, got {nx}x{ny}")));
    }
    let mut counts = vec![vec![0u64; nx]; ny];
    let width = window.re_max - window.re_min;
    let height = window.im_max - window.im_min;
    for &z in eigs {
        if !window.contains(z) {
            continue;
        }
        let ix = (((z.re - window.re_min) / width * nx as f64) as usize).min(nx - 1);
        let iy = (((z.im - window.im_min) / height * ny as f64) as usize).min(ny - 1);
        counts[iy][ix] += 1;
    }
    Ok(DensityGrid { window, nx, ny, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: Complex64,
    /// Standard error of the complex mean, `sqrt(Var(re) + Var(im)) / sqrt(T)`
    /// from the per-trial means; NaN for a single trial.
    pub std_error: f64,
    pub trials: usize,
}

impl MeanEstimate {
    /// `|mean - target|` measured in standard errors.
    pub fn z_score(&self, target: Complex64) -> f64 {
        (self.mean - target).norm() / self.std_error
    }
}

/// Grand mean of all eigenvalues with a standard error from per-trial means.
pub fn mean_eigenvalue(samples: &[SpectrumSample]) -> Result<MeanEstimate> {
    let per_trial: Vec<Complex64> = samples.iter().filter(|s| !s.eigs.is_empty()).map(SpectrumSample::mean).collect();
    mean_of_trial_means(&per_trial)
}

pub fn mean_of_trial_means(per_trial: &[Complex64]) -> Result<MeanEstimate> {
    if per_trial.is_empty() {
        return Err(Error::EmptyInput);
    }
    let t = per_trial.len() as f64;
    let mean = per_trial.iter().sum::<Complex64>() / t;
    let std_error = if per_trial.len() < 2 {
        f64::NAN
    } else {
        let var = per_trial.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (t - 1.0);
        (var / t).sqrt()
    };
    Ok(MeanEstimate { mean, std_error, trials: per_trial.len() })
}
