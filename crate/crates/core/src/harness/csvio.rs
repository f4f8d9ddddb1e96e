//! CSV layouts for eigenvalue clouds, support boundaries and density grids.
//! Floats are written in shortest round-trip form; line endings are LF.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::empirical::DensityGrid;
use crate::error::{Error, Result};

pub const EIGEN_HEADER: [&str; 5] = ["trial", "n", "p", "re_lambda", "im_lambda"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub trial: usize,
    pub n: usize,
    pub p: usize,
    pub re_lambda: f64,
    pub im_lambda: f64,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_eigen_rows<W: Write>(out: W, rows: &[EigenRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).has_headers(false).from_writer(out);
    w.write_record(EIGEN_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an eigenvalue CSV as written by [`write_eigen_rows`]. The header
/// must match exactly and every value must be finite.
pub fn read_eigen_rows<R: Read>(input: R) -> Result<Vec<EigenRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(EIGEN_HEADER) {
        return Err(Error::InvalidConfig(format!("unexpected eigenvalue CSV header {:?}", header)));
    }
    let mut rows = Vec::new();
    for record in r.deserialize::<EigenRow>() {
        let row = record?;
        if !(row.re_lambda.is_finite() && row.im_lambda.is_finite()) {
            return Err(Error::NonFinite);
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub re: f64,
    pub im: f64,
    /// 1 on the row that marks a point mass at the origin.
    pub atom: u8,
}

pub fn write_boundary<W: Write>(out: W, points: &[Complex64], zero_atom: bool) -> Result<()> {
    let mut w = writer(out);
    for z in points {
        w.serialize(BoundaryRow { re: z.re, im: z.im, atom: 0 })?;
    }
    if zero_atom {
        w.serialize(BoundaryRow { re: 0.0, im: 0.0, atom: 1 })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_boundary<R: Read>(input: R) -> Result<Vec<BoundaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Serialize)]
struct DensityRow {
    ix: usize,
    iy: usize,
    re_lo: f64,
    re_hi: f64,
    im_lo: f64,
    im_hi: f64,
    count: u64,
}

pub fn write_density<W: Write>(out: W, grid: &DensityGrid) -> Result<()> {
    let mut w = writer(out);
    let win = grid.window;
    let dx = (win.re_max - win.re_min) / grid.nx as f64;
    let dy = (win.im_max - win.im_min) / grid.ny as f64;
    for (iy, row) in grid.counts.iter().enumerate() {
        for (ix, &count) in row.iter().enumerate() {
            w.serialize(DensityRow {
                ix,
                iy,
                re_lo: win.re_min + dx * ix as f64,
                re_hi: win.re_min + dx * (ix + 1) as f64,
                im_lo: win.im_min + dy * iy as f64,
                im_hi: win.im_min + dy * (iy + 1) as f64,
                count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
