//! Finite-size Monte Carlo of the full pipeline.
//!
//! μ is materialized as `‖μ‖ e₁`. Every random draw comes from a stream keyed
//! by (seed, trial, purpose), see [`rng`].

pub mod data;
pub mod monte_carlo;
pub mod ridge;
pub mod rng;
pub mod spectrum;

pub use data::{fit_generator, mean_vector, prune, psd_sqrt, sample_real, sample_synthetic, GeneratorModel, LabeledMatrix};
pub use monte_carlo::{monte_carlo, monte_carlo_with, run_trial, train_trial, GeneratorSpec, MonteCarloSummary, TrialOutcome};
pub use ridge::{decision_scores, decision_stats, train_ridge, DecisionStats, RidgeModel};
pub use rng::{stream, Purpose, SimRng};
pub use spectrum::{kolmogorov_distance_mp, spectrum};
