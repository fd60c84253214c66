//! Random-matrix theory and Monte Carlo simulation for a ridge classifier
//! trained on a mixture of real Gaussian data and pruned synthetic data
//! drawn from a fitted Gaussian generator.

pub mod config;
pub mod datasets;
pub mod error;
pub mod scalar;
pub mod simulate;
pub mod theory;

pub use config::{derive, load_config, pruner_moments, DerivedRatios, ExperimentConfig};
pub use error::{Error, Result};
pub use scalar::{normal_cdf, Scalar};

pub type Deltas = theory::Deltas<f64>;
pub type ScalarLedger = theory::ScalarLedger<f64>;
pub type TheoryStats = theory::TheoryStats<f64>;
pub type TheoryReport = theory::TheoryReport<f64>;
pub type Ratios = DerivedRatios<f64>;
