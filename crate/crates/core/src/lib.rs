//! Driven spin-boson qubit in an Ohmic bath.
//!
//! The crate evaluates the bath kernels, the time-dependent coefficients of
//! the short-time master equation and integrates the resulting reduced
//! dynamics of the qubit, tracking its purity.

pub mod coefficients;
pub mod error;
pub mod evolve;
pub mod kernels;
pub mod model;
pub mod quadrature;

pub use coefficients::{CoefficientCache, CoefficientSet, HeffCoeffs, PauliWeights};
pub use error::{DsbError, Result};
pub use evolve::{evolve, EvolveConfig, PurityMode, Sample, StepControl, Trajectory};
pub use kernels::{KernelSample, KernelTable};
pub use model::{BathParams, BlochVector, DensityMatrix, Mat2, QubitParams, TimeUnit, Units};
