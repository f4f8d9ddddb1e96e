//! Closed-form limiting supports.
//!
//! * `XY*`: an ellipse centred at `sx sy (1 + alpha) tau`, semi-axes
//!   `sx sy sqrt(alpha) (1 +- |tau|^2)`, major axis along `arg(tau)`, plus a
//!   point mass at zero when `alpha < 1`.
//! * `XY+`: a disc centred at `(sx / sy) tau` with squared radius
//!   `(sx / sy)^2 (1 - |tau|^2) / (beta - 1)`, `beta = max(alpha, 1 / alpha)`,
//!   plus a point mass at zero when `alpha < 1`. Undefined at `alpha = 1`.
//!
//! The disc can also be reached pointwise: `lambda != 0` is in the support iff
//! the squared correlation between entries of `Y` and `Y - X / lambda` is at
//! most `min(alpha, 1 / alpha)`. [`in_support_via_tau`] evaluates that route
//! independently of [`disc_support`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{validate_params, EnsembleParams};
use crate::error::{Error, Result};

/// Points with `|lambda| <= ZERO_ATOM_TOL` belong to a support with a zero atom.
pub const ZERO_ATOM_TOL: f64 = 1e-12;

/// Thickness used in place of a vanishing semi-axis or radius.
pub const DEGENERATE_THICKNESS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    /// `M = X Y*`
    ConjTranspose,
    /// `M = X Y+`
    PseudoInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseSupport {
    pub center: Complex64,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis, `arg(tau)`.
    pub rotation: f64,
    pub zero_atom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscSupport {
    pub center: Complex64,
    pub radius: f64,
    pub zero_atom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Ellipse(EllipseSupport),
    Disc(DiscSupport),
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

pub fn ellipse_support(params: &EnsembleParams, alpha: f64) -> Result<EllipseSupport> {
    validate_params(params)?;
    check_alpha(alpha)?;
    let scale = params.sigma_x * params.sigma_y;
    let t2 = params.tau.norm_sqr().min(1.0);
    let root = alpha.sqrt();
    Ok(EllipseSupport {
        center: params.tau * (scale * (1.0 + alpha)),
        semi_major: scale * root * (1.0 + t2),
        semi_minor: scale * root * (1.0 - t2),
        rotation: params.tau.arg(),
        zero_atom: alpha < 1.0,
    })
}

pub fn disc_support(params: &EnsembleParams, alpha: f64) -> Result<DiscSupport> {
    validate_params(params)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::AlphaOneUnsupported);
    }
    let ratio = params.sigma_x / params.sigma_y;
    let beta = alpha.max(1.0 / alpha);
    let t2 = params.tau.norm_sqr().min(1.0);
    Ok(DiscSupport { center: params.tau * ratio, radius: ratio * ((1.0 - t2) / (beta - 1.0)).sqrt(), zero_atom: alpha < 1.0 })
}

/// Predicted support of `M` for the given product.
pub fn predicted_support(params: &EnsembleParams, alpha: f64, product: ProductKind) -> Result<Support> {
    Ok(match product {
        ProductKind::ConjTranspose => Support::Ellipse(ellipse_support(params, alpha)?),
        ProductKind::PseudoInverse => Support::Disc(disc_support(params, alpha)?),
    })
}

impl EllipseSupport {
    /// `lambda` in the ellipse's own frame, each axis divided by its semi-axis.
    fn normalized(&self, lambda: Complex64) -> (f64, f64) {
        let local = (lambda - self.center) * Complex64::from_polar(1.0, -self.rotation);
        let b = self.semi_minor.max(DEGENERATE_THICKNESS);
        let a = self.semi_major.max(DEGENERATE_THICKNESS);
        (local.re / a, local.im / b)
    }

    /// Square root of the ellipse quadratic form; `<= 1` inside. A segment
    /// (`semi_minor` below [`DEGENERATE_THICKNESS`]) is treated as a strip of
    /// that half-width, measured in the max norm so that rounding across the
    /// thin axis cannot move points near the segment ends.
    pub fn normalized_radius(&self, lambda: Complex64) -> f64 {
        let (u, v) = self.normalized(lambda);
        if self.semi_minor < DEGENERATE_THICKNESS {
            u.abs().max(v.abs())
        } else {
            u.hypot(v)
        }
    }

    pub fn boundary(&self, points: usize) -> Vec<Complex64> {
        let turn = Complex64::from_polar(1.0, self.rotation);
        (0..points)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / points as f64;
                self.center + turn * Complex64::new(self.semi_major * t.cos(), self.semi_minor * t.sin())
            })
            .collect()
    }
}

impl DiscSupport {
    pub fn normalized_radius(&self, lambda: Complex64) -> f64 {
        (lambda - self.center).norm() / self.radius.max(DEGENERATE_THICKNESS)
    }

    pub fn boundary(&self, points: usize) -> Vec<Complex64> {
        (0..points).map(|k| self.center + Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / points as f64)).collect()
    }
}

impl Support {
    pub fn zero_atom(&self) -> bool {
        match self {
            Support::Ellipse(e) => e.zero_atom,
            Support::Disc(d) => d.zero_atom,
        }
    }

    pub fn center(&self) -> Complex64 {
        match self {
            Support::Ellipse(e) => e.center,
            Support::Disc(d) => d.center,
        }
    }

    /// Normalized distance from the centre: the square root of the ellipse
    /// quadratic form, or `|lambda - c| / r` for the disc. Ignores the zero atom.
    pub fn normalized_radius(&self, lambda: Complex64) -> f64 {
        match self {
            Support::Ellipse(e) => e.normalized_radius(lambda),
            Support::Disc(d) => d.normalized_radius(lambda),
        }
    }

    /// Boundary polyline with `points` vertices, starting on the major axis.
    pub fn boundary(&self, points: usize) -> Vec<Complex64> {
        match self {
            Support::Ellipse(e) => e.boundary(points),
            Support::Disc(d) => d.boundary(points),
        }
    }
}

/// Membership in the support dilated by `(1 + margin)` about its centre.
/// With a zero atom, `lambda = 0` (within [`ZERO_ATOM_TOL`]) is always a member.
pub fn support_contains(support: &Support, lambda: Complex64, margin: f64) -> bool {
    if support.zero_atom() && lambda.norm() <= ZERO_ATOM_TOL {
        return true;
    }
    support.normalized_radius(lambda) <= 1.0 + margin
}

/// Whether `0` lies in the ellipse: `|tau|^2 <= 1 / alpha`.
pub fn zero_in_ellipse(tau: Complex64, alpha: f64) -> bool {
    tau.norm_sqr() <= 1.0 / alpha
}

/// Squared correlation between entries `y` and `y - x / lambda`:
///
/// ```text
/// (sy^2 - 2 sx sy Re(tau / lambda) + |tau|^2 sx^2 / |lambda|^2)
///   / (sy^2 - 2 sx sy Re(tau / lambda) + sx^2 / |lambda|^2)
/// ```
///
/// Evaluated after multiplying through by `|lambda|^2`. Where both vanish
/// (`|tau| = 1` and `lambda = (sx / sy) tau`) the limit 1 is returned.
pub fn tau_lambda_sq(params: &EnsembleParams, lambda: Complex64) -> Result<f64> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::LambdaZero);
    }
    let (sx, sy) = (params.sigma_x, params.sigma_y);
    let tau = params.tau;
    let common = sy * sy * lambda.norm_sqr() - 2.0 * sx * sy * (tau * lambda.conj()).re;
    let num = common + tau.norm_sqr() * sx * sx;
    let den = common + sx * sx;
    if den <= f64::EPSILON * (sx * sx + sy * sy * lambda.norm_sqr()) {
        return Ok(1.0);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Support membership of `lambda != 0` through the correlation threshold
/// `tau_lambda_sq <= min(alpha, 1 / alpha)`.
pub fn in_support_via_tau(params: &EnsembleParams, alpha: f64, lambda: Complex64) -> Result<bool> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::AlphaOneUnsupported);
    }
    let threshold = alpha.min(1.0 / alpha);
    Ok(tau_lambda_sq(params, lambda)? <= threshold)
}

/// Exact expectation of the mean eigenvalue `trace(M) / N`:
/// `alpha tau sx sy` for `XY*`, `tau (sx / sy) min(1, alpha)` for `XY+`.
pub fn mean_eigenvalue_prediction(params: &EnsembleParams, alpha: f64, product: ProductKind) -> Complex64 {
    match product {
        ProductKind::ConjTranspose => params.tau * (alpha * params.sigma_x * params.sigma_y),
        ProductKind::PseudoInverse => params.tau * (params.sigma_x / params.sigma_y * alpha.min(1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleKind;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(sx: f64, sy: f64, tau: Complex64) -> EnsembleParams {
        EnsembleParams::new(sx, sy, tau, EnsembleKind::ComplexGeneral).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn ellipse_examples() {
        let e = ellipse_support(&params(1.0, 1.0, c(0.0, 0.0)), 1.0).unwrap();
        assert_eq!(e.center, c(0.0, 0.0));
        assert!(close(e.semi_major, 1.0) && close(e.semi_minor, 1.0) && !e.zero_atom);

        // tau = 1 gives X = Y; the segment [1, 9] is the Wishart edge (1 +- sqrt 4)^2.
        let e = ellipse_support(&params(1.0, 1.0, c(1.0, 0.0)), 4.0).unwrap();
        assert!(close(e.center.re, 5.0) && close(e.semi_major, 4.0) && e.semi_minor == 0.0);
        assert!(close(e.center.re - e.semi_major, (1.0 - 2.0f64).powi(2)));
        assert!(close(e.center.re + e.semi_major, (1.0 + 2.0f64).powi(2)));

        let e = ellipse_support(&params(2.0, 3.0, c(0.5, 0.0)), 0.25).unwrap();
        assert!(close(e.center.re, 3.75) && close(e.semi_major, 3.75) && close(e.semi_minor, 2.25));
        assert!(e.zero_atom && e.rotation == 0.0);
    }

    #[test]
    fn disc_examples() {
        let d = disc_support(&params(2.0, 1.0, c(0.0, 0.0)), 2.0).unwrap();
        assert!(d.center == c(0.0, 0.0) && close(d.radius, 2.0) && !d.zero_atom);

        let d = disc_support(&params(1.0, 1.0, c(0.6, 0.0)), 4.0).unwrap();
        assert!(close(d.center.re, 0.6) && close(d.radius, (0.64f64 / 3.0).sqrt()));
        assert!((d.radius - 0.46188).abs() < 1e-5);

        assert!(matches!(disc_support(&params(1.0, 1.0, c(0.3, 0.0)), 1.0), Err(Error::AlphaOneUnsupported)));
        assert!(disc_support(&params(1.0, 1.0, c(0.3, 0.0)), 0.5).unwrap().zero_atom);
    }

    #[test]
    fn invalid_alpha_is_rejected() {
        for alpha in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(ellipse_support(&params(1.0, 1.0, c(0.0, 0.0)), alpha), Err(Error::InvalidAlpha(_))));
        }
    }

    #[test]
    fn membership_examples() {
        let unit = Support::Ellipse(ellipse_support(&params(1.0, 1.0, c(0.0, 0.0)), 1.0).unwrap());
        assert!(support_contains(&unit, c(1.0, 0.0), 0.0));
        assert!(!support_contains(&unit, c(1.01, 0.0), 0.0));
        assert!(support_contains(&unit, c(1.01, 0.0), 0.1));

        let disc = Support::Disc(disc_support(&params(1.0, 1.0, c(0.6, 0.0)), 4.0).unwrap());
        assert!(!support_contains(&disc, c(0.0, 0.0), 0.0));

        let with_atom = Support::Disc(disc_support(&params(1.0, 1.0, c(0.9, 0.0)), 0.1).unwrap());
        assert!(!support_contains(&with_atom, c(1e-6, 0.0), 0.0));
        assert!(support_contains(&with_atom, c(0.0, 0.0), 0.0));
    }

    #[test]
    fn degenerate_ellipse_is_a_thin_strip() {
        let seg = Support::Ellipse(ellipse_support(&params(1.0, 1.0, c(1.0, 0.0)), 4.0).unwrap());
        assert!(support_contains(&seg, c(2.0, 0.0), 0.0));
        assert!(support_contains(&seg, c(8.999, 0.0), 0.0));
        assert!(!support_contains(&seg, c(5.0, 1e-6), 0.0));
        assert!(!support_contains(&seg, c(9.5, 0.0), 0.0));

        // Rotated segment from 0 to 4 e^{i pi/4}: both ends stay on the boundary.
        let tau = Complex64::from_polar(1.0, PI / 4.0);
        let e = ellipse_support(&params(1.0, 1.0, tau), 1.0).unwrap();
        for end in [c(0.0, 0.0), 4.0 * tau] {
            assert!((Support::Ellipse(e).normalized_radius(end) - 1.0).abs() < 1e-12, "{end}");
        }
    }

    #[test]
    fn zero_in_ellipse_examples() {
        assert!(zero_in_ellipse(c(0.9, 0.0), 0.5));
        assert!(zero_in_ellipse(c(0.5, 0.0), 4.0));
        assert!(!zero_in_ellipse(c(0.6, 0.0), 4.0));
    }

    #[test]
    fn tau_lambda_examples() {
        let one = c(1.0, 0.0);
        for lambda in [c(1.0, 0.0), c(-0.4, 2.0), c(3.0, -1.0)] {
            assert_eq!(tau_lambda_sq(&params(1.0, 1.0, one), lambda).unwrap(), 1.0);
        }
        assert!(close(tau_lambda_sq(&params(1.0, 1.0, c(0.0, 0.0)), one).unwrap(), 0.5));
        assert!(close(tau_lambda_sq(&params(1.0, 1.0, c(0.5, 0.0)), one).unwrap(), 0.25));
        assert!(matches!(tau_lambda_sq(&params(1.0, 1.0, one), c(0.0, 0.0)), Err(Error::LambdaZero)));
    }

    #[test]
    fn via_tau_examples() {
        let p1 = params(1.0, 1.0, c(1.0, 0.0));
        assert!(!in_support_via_tau(&p1, 2.0, c(0.3, 0.2)).unwrap());
        let p0 = params(1.0, 1.0, c(0.0, 0.0));
        assert!(close(tau_lambda_sq(&p0, c(1.0, 0.0)).unwrap(), 0.5));
        assert!(in_support_via_tau(&p0, 2.0, c(1.0, 0.0)).unwrap());
        assert!(close(tau_lambda_sq(&p0, c(2.0, 0.0)).unwrap(), 0.8));
        assert!(!in_support_via_tau(&p0, 2.0, c(2.0, 0.0)).unwrap());
        assert!(matches!(in_support_via_tau(&p0, 1.0, c(1.0, 0.0)), Err(Error::AlphaOneUnsupported)));
        assert!(matches!(in_support_via_tau(&p0, 2.0, c(0.0, 0.0)), Err(Error::LambdaZero)));
    }

    #[test]
    fn mean_prediction_examples() {
        for kind in [ProductKind::ConjTranspose, ProductKind::PseudoInverse] {
            assert_eq!(mean_eigenvalue_prediction(&params(1.7, 0.3, c(0.0, 0.0)), 2.0, kind), c(0.0, 0.0));
        }
        let m = mean_eigenvalue_prediction(&params(1.0, 1.0, c(0.5, 0.0)), 2.0, ProductKind::ConjTranspose);
        assert!(close(m.re, 1.0));
        let m = mean_eigenvalue_prediction(&params(2.0, 1.0, c(0.5, 0.0)), 0.5, ProductKind::PseudoInverse);
        assert!(close(m.re, 0.5));
    }

    #[test]
    fn boundary_points_lie_on_the_curve() {
        let d = disc_support(&params(1.0, 1.0, c(0.0, 0.0)), 2.0).unwrap();
        for z in d.boundary(512) {
            assert!((z.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let e = ellipse_support(&params(1.5, 0.8, c(0.0, 0.0)), 3.0).unwrap();
        for z in e.boundary(512) {
            let q = (z.re / e.semi_major).powi(2) + (z.im / e.semi_minor).powi(2);
            assert!((q - 1.0).abs() < 1e-12);
        }
    }

    fn tau_strategy() -> impl Strategy<Value = Complex64> {
        (0.0f64..0.999, -PI..PI).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
    }

    proptest! {
        #[test]
        fn tau_lambda_is_a_squared_correlation(
            sx in 0.05f64..5.0, sy in 0.05f64..5.0, tau in tau_strategy(),
            lr in -10.0f64..10.0, li in -10.0f64..10.0,
        ) {
            prop_assume!(lr != 0.0 || li != 0.0);
            let t = tau_lambda_sq(&params(sx, sy, tau), c(lr, li)).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
        }

        #[test]
        fn rotation_covariance(
            sx in 0.1f64..3.0, sy in 0.1f64..3.0, r in 0.01f64..1.0, phi in -PI..PI,
            theta in -PI..PI, alpha in 0.1f64..5.0,
        ) {
            let base = ellipse_support(&params(sx, sy, Complex64::from_polar(r, phi)), alpha).unwrap();
            let turned_tau = Complex64::from_polar(r, phi) * Complex64::from_polar(1.0, theta);
            let turned = ellipse_support(&params(sx, sy, turned_tau), alpha).unwrap();
            let expected_center = base.center * Complex64::from_polar(1.0, theta);
            prop_assert!((turned.center - expected_center).norm() <= 1e-12 * (1.0 + base.center.norm()));
            prop_assert!(close(turned.semi_major, base.semi_major));
            prop_assert!((turned.semi_minor - base.semi_minor).abs() <= 1e-12 * (1.0 + base.semi_major));
            let mut delta = (turned.rotation - base.rotation - theta).rem_euclid(2.0 * PI);
            if delta > PI { delta -= 2.0 * PI; }
            prop_assert!(delta.abs() < 1e-9);
        }

        #[test]
        fn scale_covariance(
            sx in 0.1f64..3.0, sy in 0.1f64..3.0, k in 0.1f64..10.0, tau in tau_strategy(),
            alpha in prop_oneof![0.05f64..0.95, 1.05f64..6.0],
        ) {
            let e = ellipse_support(&params(sx, sy, tau), alpha).unwrap();
            let ek = ellipse_support(&params(k * sx, sy, tau), alpha).unwrap();
            prop_assert!((ek.center - e.center * k).norm() <= 1e-12 * (1.0 + ek.center.norm()));
            prop_assert!(close(ek.semi_major, k * e.semi_major));
            prop_assert!(close(ek.semi_minor, k * e.semi_minor));
            let d = disc_support(&params(sx, sy, tau), alpha).unwrap();
            let dk = disc_support(&params(k * sx, sy, tau), alpha).unwrap();
            prop_assert!((dk.center - d.center * k).norm() <= 1e-12 * (1.0 + dk.center.norm()));
            prop_assert!(close(dk.radius, k * d.radius));
        }
    }

    #[test]
    fn unit_correlation_degenerates() {
        for phi in [0.0, 1.0, -2.5] {
            let p = params(1.3, 0.4, Complex64::from_polar(1.0, phi));
            assert!(ellipse_support(&p, 2.0).unwrap().semi_minor.abs() < 1e-12);
            assert!(disc_support(&p, 3.0).unwrap().radius < 1e-6);
        }
    }
}
