//! Estimation of the number of narrowband sources impinging on a uniform
//! circular array.
//!
//! The crate is organised bottom-up:
//!
//! * [`array_model`] synthesizes snapshot blocks `Y = A·S + W` for a UCA
//!   receiving QPSK sources in complex white Gaussian noise.
//! * [`spectral`] estimates the auto-covariance, centered covariance and
//!   correlation-coefficient matrices and their eigenvalues.
//! * [`detectors`] turns an eigenvalue spectrum into a source count: AIC,
//!   MDL, the increment-threshold baseline, and the two argmax detectors
//!   (moving increment, moving standard deviation).
//! * [`montecarlo`] runs seeded trials and parameter sweeps and reports
//!   error rates.
//! * [`report`] and [`parse`] hold the CSV schemas and the flag-value
//!   parsers used by the [`cli`].

pub mod array_model;
pub mod cli;
pub mod detectors;
mod error;
pub mod montecarlo;
pub mod parse;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
