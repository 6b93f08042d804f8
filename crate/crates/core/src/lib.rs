//! Saturated and nested regression models, their information matrices, and
//! the eigenvalue-interlacing checks that order their bias and variance.
//!
//! Families covered: ordinary least squares ([`linear`]), Gaussian/binomial/
//! Poisson GLMs ([`glm`]), Cox proportional hazards ([`cox`]) and
//! autoregressive models via Yule-Walker ([`timeseries`]). Each has a
//! `compare_nested*` entry point producing a [`NestedComparisonReport`].
//! [`harness`] generates synthetic data and runs complexity sweeps;
//! [`verify`] runs the randomized interlacing corpus.
//!
//! Independent work items (fuzz trials, sweep replicates) run on rayon when
//! the `parallel` feature is on; see [`Execution`].

pub mod cox;
pub mod error;
mod exec;
pub mod glm;
pub mod harness;
pub mod linalg;
pub mod linear;
pub mod report;
pub mod rng;
pub mod timeseries;
pub mod verify;

pub use error::{Error, ModelRole, Result};
pub use exec::Execution;
pub use linalg::{ColumnSubset, InterlacingReport, Matrix, SpectralSummary, SymmetricMatrix};
pub use linear::{DesignMatrix, LinearFit};
pub use report::{ComparisonMode, ModelFamily, NestedComparisonReport};
