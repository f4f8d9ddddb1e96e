//! Spectra of products of paired Gaussian random matrices.
//!
//! `X` and `Y` are `N x P` matrices whose corresponding entries are jointly
//! Gaussian with covariance `Sigma / N`,
//!
//! ```text
//! Sigma = [[sx^2,             tau sx sy],
//!          [conj(tau) sx sy,  sy^2     ]]
//! ```
//!
//! The crate samples such pairs ([`ensembles`]), computes the eigenvalues of
//! `X Y*` and of `X Y+` with `Y+` the Moore-Penrose pseudo-inverse
//! ([`matalg`], [`empirical`]), evaluates the closed-form limiting supports of
//! both spectra ([`predict`]) and checks finite-N samples against them
//! ([`harness`]).

pub mod complex;
pub mod empirical;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod matalg;
pub mod predict;

pub use error::{Error, Result};
pub use faer;
pub use num_complex::Complex64;
