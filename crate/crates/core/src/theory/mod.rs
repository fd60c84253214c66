//! Deterministic equivalents and closed-form performance of the ridge
//! classifier trained on real plus pruned synthetic data.

pub mod deltas;
pub mod general;
pub mod isotropic;
pub mod ledger;
pub mod marchenko_pastur;
mod moments;
pub mod stats;

pub use deltas::{solve_deltas, DeltaInputs, Deltas, SolverOptions};
pub use general::{general_covariance_stats, solve_spectral_deltas, SpectralDeltas};
pub use isotropic::{isotropic_model_stats, isotropic_stats, solve_isotropic_delta, IsotropicModel};
pub use ledger::{build_ledger, ScalarLedger};
pub use marchenko_pastur::{marchenko_pastur_density, mp_cdf, mp_point_mass, mp_support};
pub use stats::{
    corollary_delta_s, corollary_synthetic_stats, critical_epsilon, theorem1_stats,
    theory_for_config, theory_for_ratios, TheoryReport, TheoryStats,
};
