//! Spectral anonymization of tabular data.
//!
//! A dataset is centered, decomposed as X = U·D·V' + 1·x̄', and rebuilt
//! after perturbing each column of U independently — by a uniform random
//! permutation, by random sign flips, or by a Haar-uniform orthogonal
//! transformation. Because the perturbations act in the spectral basis,
//! the output keeps the first and second moments of the original data
//! approximately intact while individual records are disguised.
//!
//! The crate bundles:
//! - the anonymizer itself ([`anonymize`]),
//! - closed-form limiting covariances of the sample mean and sample
//!   covariance for anonymized and original data ([`asymptotics`]),
//! - a seeded Monte Carlo harness measuring how fast empirical
//!   covariances approach those limits ([`simulate`]),
//! - distance-based record-linkage privacy evaluation ([`privacy`]).
//!
//! Start with the runnable examples (`cargo run --example`); the
//! `spectral-anon` binary exposes the same functionality on the command
//! line for CSV files.

pub mod anonymize;
pub mod asymptotics;
pub mod cli;
pub mod data;
pub mod error;
pub mod io;
pub mod linalg;
pub mod privacy;
pub mod sampling;
pub mod simulate;

pub use anonymize::{
    anonymize, anonymize_data, fit_spectral, Method, OrthogonalMode, SpectralModel,
};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use sampling::RngStream;

pub use nalgebra::{DMatrix, DVector};
