//! Paired Gaussian ensembles: parameter validation, the entry covariance and
//! reproducible sampling of `(X, Y)` pairs.
//!
//! Entries are produced by whitening: `u, v` are independent standard entries
//! with `E|u|^2 = 1/N`, and
//!
//! ```text
//! x = sigma_x * u
//! y = sigma_y * (conj(tau) * u + sqrt(1 - |tau|^2) * v)
//! ```
//!
//! so that `E[x conj(y)] = tau sigma_x sigma_y / N`, i.e. `tau` sits in the
//! row-x / column-y slot of the 2x2 covariance.

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::complex::serde_scalar;
use crate::error::{Error, Result};

/// Slack on `|tau| <= 1` for values that went through a polar round trip.
pub const TAU_SLACK: f64 = 1e-12;

/// Default real/imaginary variance split for [`EnsembleKind::ComplexIndependent`].
pub const DEFAULT_SPLIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Real entries, real `tau`.
    Real,
    /// Complex entries whose real and imaginary parts are independent real
    /// paired Gaussians with covariances `split * Sigma` and
    /// `(1 - split) * Sigma`. Real `tau` only.
    ComplexIndependent {
        #[serde(default = "default_split")]
        split: f64,
    },
    /// Circularly-symmetric complex entries; complex `tau` allowed.
    ComplexGeneral,
}

fn default_split() -> f64 {
    DEFAULT_SPLIT
}

impl EnsembleKind {
    pub fn complex_independent() -> Self {
        EnsembleKind::ComplexIndependent { split: DEFAULT_SPLIT }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, EnsembleKind::Real)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    #[serde(with = "serde_scalar")]
    pub tau: Complex64,
    pub kind: EnsembleKind,
}

impl EnsembleParams {
    pub fn new(sigma_x: f64, sigma_y: f64, tau: Complex64, kind: EnsembleKind) -> Result<Self> {
        let params = Self { sigma_x, sigma_y, tau, kind };
        validate_params(&params)?;
        Ok(params)
    }

    /// Unit variances with a real correlation.
    pub fn standard(tau: f64, kind: EnsembleKind) -> Result<Self> {
        Self::new(1.0, 1.0, Complex64::new(tau, 0.0), kind)
    }

    pub fn with_tau(self, tau: Complex64) -> Result<Self> {
        Self::new(self.sigma_x, self.sigma_y, tau, self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct Dims {
    n: usize,
    p: usize,
}

impl Dims {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidDims { n, p });
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.n as f64
    }
}

impl TryFrom<(usize, usize)> for Dims {
    type Error = Error;
    fn try_from((n, p): (usize, usize)) -> Result<Self> {
        Dims::new(n, p)
    }
}

impl From<Dims> for (usize, usize) {
    fn from(d: Dims) -> Self {
        (d.n, d.p)
    }
}

/// One sampled `(X, Y)`, both `N x P`.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    pub x_mat: Mat<Complex64>,
    pub y_mat: Mat<Complex64>,
    pub params: EnsembleParams,
    pub dims: Dims,
    pub seed: u64,
}

pub fn validate_params(params: &EnsembleParams) -> Result<()> {
    let EnsembleParams { sigma_x, sigma_y, tau, kind } = *params;
    if !(sigma_x.is_finite() && sigma_y.is_finite() && sigma_x > 0.0 && sigma_y > 0.0) {
        return Err(Error::NonPositiveSigma { sigma_x, sigma_y });
    }
    let modulus = tau.norm();
    if !modulus.is_finite() || modulus > 1.0 + TAU_SLACK {
        return Err(Error::TauOutOfUnitDisc { modulus });
    }
    match kind {
        EnsembleKind::ComplexGeneral => {}
        EnsembleKind::Real | EnsembleKind::ComplexIndependent { .. } if tau.im != 0.0 => {
            return Err(Error::ComplexTauInRealKind { imag: tau.im });
        }
        EnsembleKind::ComplexIndependent { split } if !(split > 0.0 && split < 1.0) => {
            return Err(Error::InvalidSplit(split));
        }
        _ => {}
    }
    Ok(())
}

/// Returns `(a, b)` with `a = conj(tau)` and `b = sqrt(1 - |tau|^2)`, so that
/// `y = sigma_y (a u + b v)` has the requested correlation with `x = sigma_x u`.
pub fn mixing_coefficients(params: &EnsembleParams) -> Result<(Complex64, f64)> {
    validate_params(params)?;
    let a = params.tau.conj();
    let b = (1.0 - params.tau.norm_sqr()).max(0.0).sqrt();
    Ok((a, b))
}

/// Population covariance of `(Re x, Im x, Re y, Im y)` scaled by `N`.
pub fn entry_covariance(params: &EnsembleParams) -> Result<[[f64; 4]; 4]> {
    let (a, b) = mixing_coefficients(params)?;
    let (re_var, im_var) = match params.kind {
        EnsembleKind::Real => (1.0, 0.0),
        EnsembleKind::ComplexIndependent { split } => (split, 1.0 - split),
        EnsembleKind::ComplexGeneral => (0.5, 0.5),
    };
    // Multiplication by c acts on (re, im) as [[c.re, -c.im], [c.im, c.re]].
    let block = |c: Complex64| [[c.re, -c.im], [c.im, c.re]];
    let sx = block(Complex64::new(params.sigma_x, 0.0));
    let ya = block(a * params.sigma_y);
    let yb = block(Complex64::new(b * params.sigma_y, 0.0));
    let zero = [[0.0; 2]; 2];
    let blocks = [[sx, zero], [ya, yb]];
    let mut lmat = [[0.0; 4]; 4];
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    lmat[2 * bi + r][2 * bj + c] = blk[r][c];
                }
            }
        }
    }
    let d = [re_var, im_var, re_var, im_var];
    let mut gamma = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gamma[i][j] = (0..4).map(|k| lmat[i][k] * d[k] * lmat[j][k]).sum();
        }
    }
    Ok(gamma)
}

/// Samples one pair. Identical `(params, dims, seed)` gives bit-identical
/// matrices. Entries are drawn row-major, `u` before `v` per entry.
pub fn sample_pair(params: &EnsembleParams, dims: Dims, seed: u64) -> Result<MatrixPair> {
    let (a, b) = mixing_coefficients(params)?;
    let (n, p) = (dims.n(), dims.p());
    let inv_n = 1.0 / n as f64;
    let (re_sd, im_sd) = match params.kind {
        EnsembleKind::Real => (inv_n.sqrt(), 0.0),
        EnsembleKind::ComplexIndependent { split } => ((split * inv_n).sqrt(), ((1.0 - split) * inv_n).sqrt()),
        EnsembleKind::ComplexGeneral => ((0.5 * inv_n).sqrt(), (0.5 * inv_n).sqrt()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let re: f64 = StandardNormal.sample(rng);
        if im_sd == 0.0 {
            Complex64::new(re * re_sd, 0.0)
        } else {
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * re_sd, im * im_sd)
        }
    };
    let mut x_mat = Mat::<Complex64>::zeros(n, p);
    let mut y_mat = Mat::<Complex64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            x_mat[(i, j)] = u * params.sigma_x;
            y_mat[(i, j)] = (a * u + v * b) * params.sigma_y;
        }
    }
    Ok(MatrixPair { x_mat, y_mat, params: *params, dims, seed })
}
