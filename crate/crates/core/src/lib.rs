//! Numerical toolkit for opening-induced localization in non-Hermitian systems:
//! a closed-form 2x2 exceptional-point model, N x N non-Hermitian random-matrix
//! ensembles with localization and level-spacing statistics, and stadium-billiard
//! periodic-orbit quantization.

pub mod billiard;
pub mod csvio;
pub mod ensemble;
pub mod linalg;
pub mod spectra;
pub mod two_level;

pub use num_complex::Complex64;
