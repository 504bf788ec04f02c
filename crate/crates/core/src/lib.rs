//! Packing-dimension estimators for atomic measures, the Gaussian-kernel
//! functional Ξ, and transport exponents of limit-periodic discrete
//! Schrödinger operators.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the command-line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod grid;
pub mod measure;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod suite;
pub mod xi;

pub use error::{Error, Result};
pub use fit::FitMode;
pub use scalar::Real;

pub type Measure = measure::AtomicMeasure<f64>;
pub type Fit = fit::PowerLawFit<f64>;
pub type Scales = grid::ScaleGrid<f64>;
pub type Times = grid::TimeGrid<f64>;
pub type Witness = dimension::HolderWitness<f64>;
pub type DimensionReport = dimension::DimensionReport<f64>;
pub type XiSeries = xi::XiSeries<f64>;
pub type Operator = operators::TridiagonalOperator<f64>;
pub type Spec = operators::LimitPeriodicSpec<f64>;
pub type Spectral = eigen::SpectralData<f64>;
