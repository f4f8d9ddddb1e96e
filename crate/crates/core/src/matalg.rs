//! Dense complex kernels: conjugate-transpose products, the SVD-based
//! Moore-Penrose pseudo-inverse, Penrose-condition residuals, a general
//! eigenvalue routine and multiset matching of spectra.
//!
//! Factorizations are delegated to `faer` (blocked Householder SVD, Hessenberg
//! reduction with multishift QR). Everything here runs with faer's sequential
//! parallelism so results do not depend on the thread count.

use faer::linalg::solvers::EvdError;
use faer::{Mat, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub(crate) fn init_backend() {
    faer::set_global_parallelism(Par::Seq);
}

#[derive(Debug, Clone)]
pub struct PinvResult {
    /// `P x N` pseudo-inverse of an `N x P` input.
    pub pinv: CMat,
    pub rank: usize,
    /// Singular values at or below this were treated as zero.
    pub cutoff: f64,
}

/// Default relative cutoff: `max(N, P) * eps`.
pub fn default_rtol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// `A B*`.
pub fn mul_adjoint(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Result<CMat> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!("A B*: A is {}x{}, B is {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    Ok(a * b.adjoint())
}

/// `A* B`.
pub fn adjoint_mul(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Result<CMat> {
    if a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch(format!("A* B: A is {}x{}, B is {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    Ok(a.adjoint() * b)
}

pub fn matmul(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Result<CMat> {
    if a.ncols() != b.nrows() {
        return Err(Error::ShapeMismatch(format!("A B: A is {}x{}, B is {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    Ok(a * b)
}

pub fn frobenius(m: MatRef<'_, Complex64>) -> f64 {
    m.norm_l2()
}

/// Moore-Penrose pseudo-inverse through the thin SVD `Y = U S V*`:
/// `Y+ = V S+ U*`, with singular values `<= rtol * s_max` dropped.
pub fn pseudo_inverse(y: MatRef<'_, Complex64>, rtol: f64) -> Result<PinvResult> {
    let (rows, cols) = (y.nrows(), y.ncols());
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    if !rtol.is_finite() || rtol < 0.0 {
        return Err(Error::InvalidConfig(format!("rtol must be finite and nonnegative, got {rtol}")));
    }
    ensure_finite(y)?;
    init_backend();
    let svd = y.thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let s_max = (0..k).map(|i| s[i].re).fold(0.0, f64::max);
    let cutoff = rtol * s_max;
    let rank = (0..k).filter(|&i| s[i].re > cutoff).count();

    // V[:, :rank] diag(1/s) U[:, :rank]*
    let u = svd.U();
    let v = svd.V();
    let scaled_v = Mat::<Complex64>::from_fn(cols, rank, |i, j| v[(i, j)] / s[j].re);
    let pinv = if rank == 0 { Mat::zeros(cols, rows) } else { scaled_v.as_ref() * u.subcols(0, rank).adjoint() };
    Ok(PinvResult { pinv, rank, cutoff })
}

/// Normal-equation forms `(Y*Y)^{-1} Y*` (tall) or `Y*(YY*)^{-1}` (wide).
/// Only meaningful for full-rank input; kept as a cross-check of
/// [`pseudo_inverse`].
pub fn pinv_normal_equations(y: MatRef<'_, Complex64>) -> Result<CMat> {
    use faer::linalg::solvers::Solve;
    let (rows, cols) = (y.nrows(), y.ncols());
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    init_backend();
    if rows >= cols {
        let gram = y.adjoint() * y;
        let rhs = y.adjoint().to_owned();
        Ok(gram.partial_piv_lu().solve(rhs))
    } else {
        // Y*(YY*)^{-1} = ((YY*)^{-1} Y)* since YY* is Hermitian.
        let gram = y * y.adjoint();
        let solved = gram.partial_piv_lu().solve(y.to_owned());
        Ok(solved.adjoint().to_owned())
    }
}

/// Relative residuals of the four Penrose conditions
/// `Y Y+ Y = Y`, `Y+ Y Y+ = Y+`, `(Y Y+)* = Y Y+`, `(Y+ Y)* = Y+ Y`,
/// each divided by the Frobenius norm of `Y`, `Y+`, `Y Y+`, `Y+ Y` respectively.
pub fn penrose_residuals(y: MatRef<'_, Complex64>, pinv: MatRef<'_, Complex64>) -> Result<[f64; 4]> {
    if pinv.nrows() != y.ncols() || pinv.ncols() != y.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "pseudo-inverse of a {}x{} matrix must be {}x{}, got {}x{}",
            y.nrows(),
            y.ncols(),
            y.ncols(),
            y.nrows(),
            pinv.nrows(),
            pinv.ncols()
        )));
    }
    init_backend();
    let rel = |diff: f64, scale: f64| if scale > 0.0 { diff / scale } else { diff };
    let yp = y * pinv;
    let py = pinv * y;
    let r1 = rel((&yp * y - y).norm_l2(), y.norm_l2());
    let r2 = rel((&py * pinv - pinv).norm_l2(), pinv.norm_l2());
    let r3 = rel((yp.adjoint() - &yp).norm_l2(), yp.norm_l2());
    let r4 = rel((py.adjoint() - &py).norm_l2(), py.norm_l2());
    Ok([r1, r2, r3, r4])
}

/// All eigenvalues of a square complex matrix, with multiplicity, in the
/// solver's order.
pub fn eigenvalues(m: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    ensure_finite(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    init_backend();
    m.eigenvalues().map_err(|e| match e {
        EvdError::NoConvergence => Error::NoConvergence,
        #[allow(unreachable_patterns)]
        _ => Error::NoConvergence,
    })
}

fn ensure_finite(m: MatRef<'_, Complex64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
    }
    Ok(())
}

fn lexicographic(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Greedy nearest-neighbour matching of two equal-size multisets: both are
/// sorted by `(re, im)`, then each element of `a` in turn takes the closest
/// unused element of `b`. Returns the largest matched distance, or `None`
/// when the sizes differ.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(lexicographic);
    b.sort_by(lexicographic);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for za in &a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, zb)| (j, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_pair, Dims, EnsembleKind, EnsembleParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_rows(rows: &[&[Complex64]]) -> CMat {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn gaussian(n: usize, p: usize, seed: u64) -> CMat {
        let params = EnsembleParams::standard(0.0, EnsembleKind::ComplexGeneral).unwrap();
        sample_pair(&params, Dims::new(n, p).unwrap(), seed).unwrap().x_mat
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(lexicographic);
        v
    }

    #[test]
    fn pinv_identity() {
        let eye = Mat::<Complex64>::identity(2, 2);
        let r = pseudo_inverse(eye.as_ref(), default_rtol(2, 2)).unwrap();
        assert_eq!(r.rank, 2);
        assert!((&r.pinv - &eye).norm_l2() < 1e-15);
        let res = penrose_residuals(eye.as_ref(), eye.as_ref()).unwrap();
        assert_eq!(res, [0.0; 4]);
    }

    #[test]
    fn pinv_rank_deficient_diagonal() {
        let z = c(0.0, 0.0);
        let y = from_rows(&[&[c(3.0, 0.0), z, z], &[z, z, z]]);
        let r = pseudo_inverse(y.as_ref(), default_rtol(2, 3)).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!((r.pinv.nrows(), r.pinv.ncols()), (3, 2));
        for i in 0..3 {
            for j in 0..2 {
                let expected = if (i, j) == (0, 0) { c(1.0 / 3.0, 0.0) } else { z };
                assert!((r.pinv[(i, j)] - expected).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn pinv_zero_matrix_has_rank_zero() {
        let y = Mat::<Complex64>::zeros(3, 2);
        let r = pseudo_inverse(y.as_ref(), default_rtol(3, 2)).unwrap();
        assert_eq!(r.rank, 0);
        assert_eq!(r.pinv.norm_l2(), 0.0);
    }

    #[test]
    fn pinv_empty_is_an_error() {
        let y = Mat::<Complex64>::zeros(0, 3);
        assert!(matches!(pseudo_inverse(y.as_ref(), 1e-12), Err(Error::EmptyMatrix { .. })));
    }

    #[test]
    fn pinv_left_inverse_of_tall_gaussian() {
        let y = gaussian(60, 20, 1);
        let r = pseudo_inverse(y.as_ref(), default_rtol(60, 20)).unwrap();
        assert_eq!(r.rank, 20);
        let eye = Mat::<Complex64>::identity(20, 20);
        assert!((&r.pinv * &y - eye).norm_max() < 1e-10);
    }

    #[test]
    fn pinv_matches_normal_equations() {
        for (n, p, seed) in [(40, 15, 2), (15, 40, 3)] {
            let y = gaussian(n, p, seed);
            let svd_route = pseudo_inverse(y.as_ref(), default_rtol(n, p)).unwrap().pinv;
            let normal = pinv_normal_equations(y.as_ref()).unwrap();
            let rel = (&svd_route - &normal).norm_l2() / svd_route.norm_l2();
            assert!(rel < 1e-8, "{n}x{p}: {rel}");
        }
    }

    #[test]
    fn pinv_is_an_involution_on_full_rank() {
        let y = gaussian(30, 12, 4);
        let once = pseudo_inverse(y.as_ref(), default_rtol(30, 12)).unwrap().pinv;
        let twice = pseudo_inverse(once.as_ref(), default_rtol(12, 30)).unwrap().pinv;
        assert!((&twice - &y).norm_l2() / y.norm_l2() < 1e-8);
    }

    #[test]
    fn penrose_residuals_small_for_random_input() {
        let y = gaussian(100, 50, 5);
        let r = pseudo_inverse(y.as_ref(), default_rtol(100, 50)).unwrap();
        let res = penrose_residuals(y.as_ref(), r.pinv.as_ref()).unwrap();
        assert!(res.iter().all(|&v| v <= 1e-10), "{res:?}");
    }

    #[test]
    fn penrose_residuals_catch_corruption() {
        let y = gaussian(100, 50, 6);
        let mut pinv = pseudo_inverse(y.as_ref(), default_rtol(100, 50)).unwrap().pinv;
        pinv[(3, 7)] += c(1.0, 0.0);
        let res = penrose_residuals(y.as_ref(), pinv.as_ref()).unwrap();
        assert!(res.iter().any(|&v| v > 1e-3), "{res:?}");
    }

    #[test]
    fn penrose_residuals_shape_mismatch() {
        let y = gaussian(5, 3, 7);
        let wrong = Mat::<Complex64>::zeros(5, 3);
        assert!(matches!(penrose_residuals(y.as_ref(), wrong.as_ref()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn eigen_examples() {
        let z = c(0.0, 0.0);
        let nilpotent = from_rows(&[&[z, c(1.0, 0.0)], &[z, z]]);
        let e = eigenvalues(nilpotent.as_ref()).unwrap();
        assert!(e.iter().all(|v| v.norm() < 1e-12));

        let diag = from_rows(&[&[c(1.0, 2.0), z], &[z, c(3.0, 0.0)]]);
        let e = eigenvalues(diag.as_ref()).unwrap();
        assert!(match_multisets(&e, &[c(1.0, 2.0), c(3.0, 0.0)]).unwrap() < 1e-14);

        // Companion matrix of z^3 - 1.
        let one = c(1.0, 0.0);
        let companion = from_rows(&[&[z, z, one], &[one, z, z], &[z, one, z]]);
        let e = eigenvalues(companion.as_ref()).unwrap();
        let roots: Vec<_> = (0..3).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0)).collect();
        assert!(match_multisets(&e, &roots).unwrap() < 1e-10);
    }

    #[test]
    fn eigen_errors() {
        let rect = Mat::<Complex64>::zeros(2, 3);
        assert!(matches!(eigenvalues(rect.as_ref()), Err(Error::NonSquare { .. })));
        let mut bad = Mat::<Complex64>::identity(3, 3);
        bad[(1, 2)] = c(f64::NAN, 0.0);
        assert!(matches!(eigenvalues(bad.as_ref()), Err(Error::NonFinite)));
    }

    #[test]
    fn eigen_trace_and_scaling() {
        let m = gaussian(50, 50, 8);
        let e = eigenvalues(m.as_ref()).unwrap();
        let trace: Complex64 = (0..50).map(|i| m[(i, i)]).sum();
        let sum: Complex64 = e.iter().sum();
        assert!((trace - sum).norm() < 1e-8 * 50.0 * m.norm_l2());

        let scale = c(0.9, -1.3);
        let scaled = Mat::from_fn(50, 50, |i, j| m[(i, j)] * scale);
        let es = eigenvalues(scaled.as_ref()).unwrap();
        let expected: Vec<_> = e.iter().map(|v| v * scale).collect();
        assert!(match_multisets(&es, &expected).unwrap() < 1e-9);
    }

    #[test]
    fn matching_detects_size_and_outliers() {
        let a = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let b = vec![c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 1e-12)];
        assert!(match_multisets(&a, &b).unwrap() < 1e-11);
        assert!(match_multisets(&a, &b[..2]).is_none());
        let mut corrupted = b.clone();
        corrupted[0] = c(10.0, 0.0);
        assert!(match_multisets(&a, &corrupted).unwrap() > 1.0);
        assert_eq!(sorted(a.clone()).len(), 3);
    }

    #[test]
    fn shape_checks_on_products() {
        let a = gaussian(4, 3, 9);
        let b = gaussian(4, 2, 10);
        assert!(mul_adjoint(a.as_ref(), b.as_ref()).is_err());
        assert_eq!(adjoint_mul(a.as_ref(), b.as_ref()).unwrap().shape(), (3, 2));
        assert!(matmul(a.as_ref(), b.as_ref()).is_err());
    }
}
