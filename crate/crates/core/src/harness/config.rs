use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::serde_scalar;
use crate::empirical::{Window, ZeroTolPolicy};
use crate::ensembles::{validate_params, Dims, EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::predict::ProductKind;

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_MARGIN: f64 = 0.1;
pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.995;
pub const DEFAULT_EQUIVALENCE_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Penrose,
    WeinsteinAronszajn,
    ZeroAtoms,
    Coverage,
    EquivalenceGrid,
    MeanEigenvalue,
    Rotation,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Penrose,
        CheckKind::WeinsteinAronszajn,
        CheckKind::ZeroAtoms,
        CheckKind::Coverage,
        CheckKind::EquivalenceGrid,
        CheckKind::MeanEigenvalue,
        CheckKind::Rotation,
    ];

    /// Checks whose failure is reported but does not fail the run unless
    /// strict mode is on.
    pub fn advisory_by_default(self) -> bool {
        matches!(self, CheckKind::Coverage)
    }
}

/// A grid of `(tau, alpha)` cells evaluated at a fixed `N`, with
/// `P = round(alpha N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(with = "serde_scalar::vec")]
    pub taus: Vec<Complex64>,
    pub alphas: Vec<f64>,
    pub n: usize,
}

impl SweepGrid {
    pub fn dims_for(&self, alpha: f64) -> Result<Dims> {
        let p = (alpha * self.n as f64).round();
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha {alpha} at n = {} gives no columns", self.n)));
        }
        Dims::new(self.n, p as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
}

/// Output file names, relative to the `--out` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub samples_csv: String,
    pub density_csv: String,
    /// Boundary files are written as `<prefix>_<n>x<p>.csv`.
    pub boundary_prefix: String,
    pub report_json: String,
    pub sweep_dir: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            samples_csv: "eigenvalues.csv".into(),
            density_csv: "density.csv".into(),
            boundary_prefix: "boundary".into(),
            report_json: "report.json".into(),
            sweep_dir: "sweep".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: EnsembleParams,
    pub dims: Vec<Dims>,
    pub product_kind: ProductKind,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub zero_tol: ZeroTolPolicy,
    #[serde(default = "default_threshold")]
    pub coverage_threshold: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    /// Promote advisory checks to fatal.
    #[serde(default)]
    pub strict: bool,
    /// Phase applied to `tau` by the rotation check.
    #[serde(default = "default_rotation")]
    pub rotation_angle: f64,
    #[serde(default = "default_draws")]
    pub equivalence_draws: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub outputs: OutputPaths,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_margin() -> f64 {
    DEFAULT_MARGIN
}
fn default_threshold() -> f64 {
    DEFAULT_COVERAGE_THRESHOLD
}
fn default_checks() -> Vec<CheckKind> {
    CheckKind::ALL.to_vec()
}
fn default_rotation() -> f64 {
    PI / 3.0
}
fn default_draws() -> usize {
    DEFAULT_EQUIVALENCE_DRAWS
}

impl Default for ExperimentConfig {
    /// A verification run that exercises every check in a few seconds:
    /// `tau = 0.5`, complex entries with independent parts, `XY+`, one tall
    /// and one wide shape.
    fn default() -> Self {
        Self {
            params: EnsembleParams {
                sigma_x: 1.0,
                sigma_y: 1.0,
                tau: Complex64::new(0.5, 0.0),
                kind: EnsembleKind::complex_independent(),
            },
            dims: vec![Dims::new(200, 100).unwrap(), Dims::new(100, 200).unwrap()],
            product_kind: ProductKind::PseudoInverse,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            margin: DEFAULT_MARGIN,
            zero_tol: ZeroTolPolicy::default(),
            coverage_threshold: DEFAULT_COVERAGE_THRESHOLD,
            checks: default_checks(),
            strict: false,
            rotation_angle: default_rotation(),
            equivalence_draws: DEFAULT_EQUIVALENCE_DRAWS,
            sweep: None,
            density: None,
            outputs: OutputPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        validate_params(&self.params)?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() {
            return bad("at least one (n, p) shape is required".into());
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return bad(format!("margin must be finite and nonnegative, got {}", self.margin));
        }
        self.zero_tol.validate()?;
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold <= 1.0) {
            return bad(format!("coverage_threshold must lie in (0, 1], got {}", self.coverage_threshold));
        }
        let mut seen = self.checks.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return bad("each check may be listed only once".into());
        }
        if !self.rotation_angle.is_finite() {
            return bad("rotation_angle must be finite".into());
        }
        if self.equivalence_draws == 0 {
            return bad("equivalence_draws must be at least 1".into());
        }
        if let Some(grid) = &self.sweep {
            if grid.taus.is_empty() || grid.alphas.is_empty() || grid.n == 0 {
                return bad("sweep needs at least one tau, one alpha and n >= 1".into());
            }
            for &tau in &grid.taus {
                validate_params(&EnsembleParams { tau, ..self.params })?;
            }
            for &alpha in &grid.alphas {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::InvalidAlpha(alpha));
                }
                grid.dims_for(alpha)?;
            }
        }
        if let Some(density) = &self.density {
            density.window.validate()?;
            if density.nx == 0 || density.ny == 0 {
                return bad("density grid needs at least one bin per axis".into());
            }
        }
        for name in [
            &self.outputs.samples_csv,
            &self.outputs.density_csv,
            &self.outputs.boundary_prefix,
            &self.outputs.report_json,
            &self.outputs.sweep_dir,
        ] {
            if name.is_empty() {
                return bad("output names must be non-empty".into());
            }
        }
        Ok(())
    }
}
