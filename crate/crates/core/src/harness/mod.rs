//! Experiment orchestration behind the CLI: `sample`, `boundary`, `verify`
//! and `sweep`. Every command is a pure function of its configuration; the
//! only side effects are the files written under the output directory.

pub mod config;
pub mod csvio;
pub mod seeds;
pub mod verify;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CheckKind, DensitySpec, ExperimentConfig, OutputPaths, SweepGrid};
pub use seeds::{derive_seed, trial_seed};
pub use verify::{run_verify, CheckResult, CheckStatus, VerificationReport};

use crate::empirical::{self, density_grid};
use crate::ensembles::sample_pair;
use crate::error::{Error, Result};
use crate::predict::predicted_support;
use csvio::EigenRow;

/// Vertices in an emitted boundary polyline.
pub const BOUNDARY_POINTS: usize = 512;

/// Runs `f` on a dedicated pool; `threads = 0` lets rayon choose.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Eigenvalues of every configured `(shape, trial)`, in shape then trial order.
pub fn collect_eigen_rows(config: &ExperimentConfig) -> Result<Vec<EigenRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (shape, &dims) in config.dims.iter().enumerate() {
        let per_trial = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(config.base_seed, verify::STREAM_MAIN, shape, t);
                let pair = sample_pair(&config.params, dims, seed)?;
                empirical::spectrum(&pair, config.product_kind)
            })
            .collect::<Result<Vec<_>>>()?;
        for (trial, sample) in per_trial.iter().enumerate() {
            rows.extend(sample.eigs.iter().map(|z| EigenRow {
                trial,
                n: dims.n(),
                p: dims.p(),
                re_lambda: z.re,
                im_lambda: z.im,
            }));
        }
    }
    Ok(rows)
}

/// Writes the eigenvalue cloud (and the density grid when configured).
/// Returns the paths written.
pub fn cmd_sample(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = collect_eigen_rows(config)?;
    let path = out_dir.join(&config.outputs.samples_csv);
    let mut w = create(&path)?;
    csvio::write_eigen_rows(&mut w, &rows)?;
    w.flush()?;
    let mut written = vec![path];
    if let Some(DensitySpec { window, nx, ny }) = config.density {
        let eigs: Vec<_> = rows.iter().map(|r| num_complex::Complex64::new(r.re_lambda, r.im_lambda)).collect();
        let grid = density_grid(&eigs, window, nx, ny)?;
        let path = out_dir.join(&config.outputs.density_csv);
        let mut w = create(&path)?;
        csvio::write_density(&mut w, &grid)?;
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn boundary_file_name(config: &ExperimentConfig, n: usize, p: usize) -> String {
    format!("{}_{n}x{p}.csv", config.outputs.boundary_prefix)
}

/// One boundary polyline per configured shape. Fails with
/// `AlphaOneUnsupported` for `XY+` at `P = N`, before writing anything.
pub fn cmd_boundary(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let supports = config
        .dims
        .iter()
        .map(|d| predicted_support(&config.params, d.alpha(), config.product_kind).map(|s| (*d, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut written = Vec::new();
    for (dims, support) in supports {
        let path = out_dir.join(boundary_file_name(config, dims.n(), dims.p()));
        let mut w = create(&path)?;
        csvio::write_boundary(&mut w, &support.boundary(BOUNDARY_POINTS), support.zero_atom())?;
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_report(report: &VerificationReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Runs the checks and writes the JSON report. The caller maps
/// `report.passed` to the exit code.
pub fn cmd_verify(config: &ExperimentConfig, out_dir: &Path) -> Result<VerificationReport> {
    let report = run_verify(config)?;
    write_report(&report, &out_dir.join(&config.outputs.report_json))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub tau_index: usize,
    pub alpha_index: usize,
    pub n: usize,
    pub p: usize,
    pub passed: bool,
    pub report: PathBuf,
}

/// The configuration for one `(tau, alpha)` cell of the sweep grid.
pub fn sweep_cell_config(config: &ExperimentConfig, tau_index: usize, alpha_index: usize) -> Result<ExperimentConfig> {
    let grid = config.sweep.as_ref().ok_or_else(|| Error::InvalidConfig("sweep requires a `sweep` grid".into()))?;
    let mut cell = config.clone();
    cell.sweep = None;
    cell.params.tau = grid.taus[tau_index];
    cell.dims = vec![grid.dims_for(grid.alphas[alpha_index])?];
    cell.validate()?;
    Ok(cell)
}

/// Verifies every grid cell, writing `cell_<tau>_<alpha>.json` per cell and
/// an `index.csv` summary into the sweep directory.
pub fn cmd_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<SweepCell>> {
    config.validate()?;
    let grid = config.sweep.as_ref().ok_or_else(|| Error::InvalidConfig("sweep requires a `sweep` grid".into()))?;
    let dir = out_dir.join(&config.outputs.sweep_dir);
    let mut cells = Vec::new();
    for ti in 0..grid.taus.len() {
        for ai in 0..grid.alphas.len() {
            let cell_config = sweep_cell_config(config, ti, ai)?;
            let report = run_verify(&cell_config)?;
            let name = PathBuf::from(format!("cell_{ti}_{ai}.json"));
            write_report(&report, &dir.join(&name))?;
            let dims = cell_config.dims[0];
            cells.push(SweepCell {
                tau_index: ti,
                alpha_index: ai,
                n: dims.n(),
                p: dims.p(),
                passed: report.passed,
                report: name,
            });
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(&dir.join("index.csv"))?);
    w.write_record(["tau", "alpha", "n", "p", "passed", "report"])?;
    for cell in &cells {
        w.write_record([
            crate::complex::format_complex(grid.taus[cell.tau_index]),
            grid.alphas[cell.alpha_index].to_string(),
            cell.n.to_string(),
            cell.p.to_string(),
            cell.passed.to_string(),
            cell.report.display().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(cells)
}
