//! Decision-function moments and asymptotic accuracy.

use serde::Serialize;

use crate::config::{derive, DerivedRatios, ExperimentConfig};
use crate::error::{Error, Result};
use crate::scalar::{normal_cdf, Scalar};
use crate::theory::deltas::{solve_deltas, DeltaInputs, Deltas, SolverOptions};
use crate::theory::ledger::{build_ledger, ScalarLedger};

/// Moments of `wᵀx` for a test point of class +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryStats<T> {
    pub mean: T,
    /// ν, the second moment.
    pub second_moment: T,
    /// ν − mean².
    pub variance: T,
    pub accuracy: T,
}

impl<T: Scalar> TheoryStats<T> {
    /// Builds the record from `(mean, ν)`, rejecting a nonpositive variance.
    pub fn from_moments(mean: T, second_moment: T) -> Result<Self> {
        if !(mean.is_finite() && second_moment.is_finite()) {
            return Err(Error::NonFinite("decision-function moments"));
        }
        let variance = second_moment - mean * mean;
        if !(variance > T::zero()) {
            return Err(Error::InvalidRegime(format!(
                "decision-function variance {variance} is not positive"
            )));
        }
        Ok(TheoryStats {
            mean,
            second_moment,
            variance,
            accuracy: normal_cdf(mean / variance.sqrt()),
        })
    }
}

pub fn theorem1_stats<T: Scalar>(ledger: &ScalarLedger<T>, mu_norm_sq: T) -> Result<TheoryStats<T>> {
    let ScalarLedger { alpha, lambda, a, b, c, a1, b1, b2, h1, h2 } = *ledger;
    if !(mu_norm_sq > T::zero()) {
        return Err(Error::InvalidInput("mu_norm_sq must be positive".into()));
    }
    let lambda_b1 = if alpha == T::zero() {
        if b1 != T::zero() {
            return Err(Error::Internal(format!("alpha = 0 but b1 = {b1}")));
        }
        T::zero()
    } else {
        lambda * b1 / alpha
    };

    let one = T::one();
    let big_b = b + a * mu_norm_sq;
    let cm = c * mu_norm_sq;
    let mean = cm / big_b;
    let bracket = c * (one + b1 - b2) * mu_norm_sq + c / h2 - T::two() * (a1 + lambda_b1) * big_b;
    let second = cm / (h1 * big_b * big_b) * bracket + (a1 + b1) / h1;
    TheoryStats::from_moments(mean, second)
}

/// Closed-form synthetic-data delta: the nonnegative root of
/// `γδ² + (α + γ − η_s α)δ − η_s α = 0`.
pub fn corollary_delta_s<T: Scalar>(eta_s: T, alpha: T, gamma: T) -> T {
    let lin = alpha + gamma - eta_s * alpha;
    let disc = (lin * lin + T::lit(4.0) * eta_s * alpha * gamma).sqrt();
    // Two algebraically equal forms; pick the one without cancellation.
    if lin >= T::zero() {
        T::two() * eta_s * alpha / (lin + disc)
    } else {
        (disc - lin) / (T::two() * gamma)
    }
}

/// Fully synthetic training set with identity feature covariance.
pub fn corollary_synthetic_stats<T: Scalar>(
    eta_s: T,
    alpha: T,
    lambda: T,
    gamma: T,
    mu_norm_sq: T,
) -> Result<TheoryStats<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidInput("alpha must lie in (0, 1]".into()));
    }
    if !(eta_s >= T::zero() && eta_s.is_finite()) {
        return Err(Error::InvalidInput("eta_s must be nonnegative and finite".into()));
    }
    if !(mu_norm_sq > T::zero()) {
        return Err(Error::InvalidInput("mu_norm_sq must be positive".into()));
    }
    let one = T::one();
    let ds = corollary_delta_s(eta_s, alpha, gamma);
    let base = alpha + gamma * (one + ds);
    let h = one - alpha * eta_s / (base * base);
    if !(h > T::zero()) {
        return Err(Error::InvalidRegime(format!("h = {h} is not positive")));
    }
    let d = alpha * mu_norm_sq + base;
    let mean = lambda * mu_norm_sq / d;
    let second = lambda * lambda * mu_norm_sq / (h * d)
        * ((mu_norm_sq + one) / d - T::two() * (one - h) / alpha)
        + (one - h) / h;
    TheoryStats::from_moments(mean, second)
}

/// Noise level `φ/(φ + ρ)` at which a fully synthetic classifier drops to chance.
pub fn critical_epsilon<T: Scalar>(rho: T, phi: T) -> Result<T> {
    if !(phi > T::zero() && phi <= T::one()) {
        return Err(Error::InvalidInput("phi must lie in (0, 1]".into()));
    }
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::InvalidInput("rho must lie in [0, 1]".into()));
    }
    Ok(phi / (phi + rho))
}

/// Everything the mixed real/synthetic theory produces for one config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryReport<T> {
    pub ratios: DerivedRatios<T>,
    pub deltas: Deltas<T>,
    pub ledger: ScalarLedger<T>,
    pub stats: TheoryStats<T>,
}

pub fn theory_for_ratios<T: Scalar>(
    ratios: DerivedRatios<T>,
    gamma: T,
    mu_norm_sq: T,
) -> Result<TheoryReport<T>> {
    let deltas = solve_deltas(
        DeltaInputs {
            eta: ratios.eta,
            eta_hat: ratios.eta_hat,
            pi: ratios.pi,
            alpha: ratios.alpha,
            gamma,
        },
        SolverOptions::default(),
    )?;
    let ledger = build_ledger(&deltas, &ratios, gamma)?;
    let stats = theorem1_stats(&ledger, mu_norm_sq)?;
    Ok(TheoryReport { ratios, deltas, ledger, stats })
}

/// Solve, build the ledger, and evaluate the mixed-data accuracy for a config.
pub fn theory_for_config<T: Scalar>(config: &ExperimentConfig) -> Result<TheoryReport<T>> {
    let ratios = derive::<T>(config)?;
    theory_for_ratios(ratios, T::lit(config.gamma), T::lit(config.mu_norm_sq()))
}
