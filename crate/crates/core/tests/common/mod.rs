#![allow(dead_code)]

use paired_spectra::empirical::{self, coverage_of, CoverageReport, ZeroTolPolicy};
use paired_spectra::ensembles::{sample_pair, Dims, EnsembleKind, EnsembleParams};
use paired_spectra::harness::trial_seed;
use paired_spectra::predict::{predicted_support, ProductKind};
use paired_spectra::Complex64;

pub const COVERAGE_N: usize = 1000;
pub const COVERAGE_MARGIN: f64 = 0.1;
pub const COVERAGE_THRESHOLD: f64 = 0.995;

/// Seed streams so that acceptance and calibration never share draws.
pub const ACCEPTANCE_BASE: u64 = 0x5EED_0001;
pub const PILOT_BASE: u64 = 0x5EED_0002;

#[derive(Debug, Clone, Copy)]
pub struct CoverageCase {
    pub label: &'static str,
    pub kind: EnsembleKind,
    pub sigma_x: f64,
    pub alpha: f64,
    pub tau: Complex64,
    pub product: ProductKind,
}

impl CoverageCase {
    pub fn params(&self) -> EnsembleParams {
        EnsembleParams::new(self.sigma_x, 1.0, self.tau, self.kind).unwrap()
    }

    pub fn dims(&self) -> Dims {
        Dims::new(COVERAGE_N, (self.alpha * COVERAGE_N as f64).round() as usize).unwrap()
    }
}

fn kind_label(kind: EnsembleKind) -> &'static str {
    match kind {
        EnsembleKind::Real => "real",
        EnsembleKind::ComplexIndependent { .. } => "complex-independent",
        EnsembleKind::ComplexGeneral => "complex-general",
    }
}

/// `XY*` coverage cases: both complex kinds at `(1, 0)`, `(2, 0.5)`,
/// `(0.5, 0.5)`, plus a complex `tau` for the general kind.
pub fn ellipse_cases() -> Vec<CoverageCase> {
    let mut cases = Vec::new();
    for kind in [EnsembleKind::complex_independent(), EnsembleKind::ComplexGeneral] {
        for (alpha, tau) in [(1.0, 0.0), (2.0, 0.5), (0.5, 0.5)] {
            cases.push(CoverageCase {
                label: kind_label(kind),
                kind,
                sigma_x: 1.0,
                alpha,
                tau: Complex64::new(tau, 0.0),
                product: ProductKind::ConjTranspose,
            });
        }
    }
    cases.push(CoverageCase {
        label: kind_label(EnsembleKind::ComplexGeneral),
        kind: EnsembleKind::ComplexGeneral,
        sigma_x: 1.0,
        alpha: 2.0,
        tau: Complex64::new(0.35, 0.35),
        product: ProductKind::ConjTranspose,
    });
    cases
}

/// `XY+` coverage cases: real and complex-independent kinds at `(2, 0)`,
/// `(4, 0.6)`, `(0.5, 0.5)`, each with `sigma_x / sigma_y` of 1 and 2.
pub fn disc_cases() -> Vec<CoverageCase> {
    let mut cases = Vec::new();
    for kind in [EnsembleKind::Real, EnsembleKind::complex_independent()] {
        for (alpha, tau) in [(2.0, 0.0), (4.0, 0.6), (0.5, 0.5)] {
            for sigma_x in [1.0, 2.0] {
                cases.push(CoverageCase {
                    label: kind_label(kind),
                    kind,
                    sigma_x,
                    alpha,
                    tau: Complex64::new(tau, 0.0),
                    product: ProductKind::PseudoInverse,
                });
            }
        }
    }
    cases
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageRun {
    pub report: CoverageReport,
    /// Inside fraction among eigenvalues not absorbed by the zero atom.
    pub nonzero_inside: f64,
    pub zero_atom: bool,
}

pub fn run_coverage(case: &CoverageCase, base: u64, stream: u64, case_index: usize, seed_index: usize) -> CoverageRun {
    let params = case.params();
    let dims = case.dims();
    let support = predicted_support(&params, dims.alpha(), case.product).unwrap();
    let pair = sample_pair(&params, dims, trial_seed(base, stream, case_index, seed_index)).unwrap();
    let eigs = empirical::spectrum(&pair, case.product).unwrap().eigs;
    let zero_tol = ZeroTolPolicy::default().resolve(&eigs);
    let report = coverage_of(&eigs, &support, COVERAGE_MARGIN, zero_tol);
    let judged = if support.zero_atom() { report.total - report.zero_count } else { report.total };
    let nonzero_inside = if judged == 0 { 1.0 } else { 1.0 - report.outlier_count as f64 / judged as f64 };
    CoverageRun { report, nonzero_inside, zero_atom: support.zero_atom() }
}
