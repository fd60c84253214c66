//! Deterministic-covariance model with `C = σ²I` and synthetic mean
//! `μβ = βμ + μ⊥`, `μ⊥ ⟂ μ`.

use crate::config::{derive, DerivedRatios, ExperimentConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::moments::{assemble, BilinearForms, MixWeights, TraceTerms};
use crate::theory::stats::TheoryStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicModel<T> {
    pub ratios: DerivedRatios<T>,
    pub gamma: T,
    pub mu_norm_sq: T,
    pub sigma: T,
    pub beta: T,
    pub mu_perp_norm: T,
}

impl<T: Scalar> IsotropicModel<T> {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        Ok(IsotropicModel {
            ratios: derive(config)?,
            gamma: T::lit(config.gamma),
            mu_norm_sq: T::lit(config.mu_norm_sq()),
            sigma: T::lit(config.sigma),
            beta: T::lit(config.beta),
            mu_perp_norm: T::lit(config.mu_perp_norm),
        })
    }
}

/// Coefficients `[c0, c1, c2, c3]` of the cubic satisfied by δ.
pub fn delta_cubic<T: Scalar>(eta: T, pi: T, alpha: T, sigma: T, gamma: T) -> [T; 4] {
    let one = T::one();
    let s = alpha * sigma * sigma;
    [
        -eta,
        gamma + pi - eta + s * (one - pi - eta),
        gamma + s * (one + gamma - eta),
        s * gamma,
    ]
}

fn eval_cubic<T: Scalar>(c: &[T; 4], x: T) -> T {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

/// The unique nonnegative root of [`delta_cubic`].
///
/// `δ·θ(δ)` is increasing in δ and brackets η on `[0, η/γ]`, so bisection on
/// it is safe; a Newton step on the cubic then polishes the root.
pub fn solve_isotropic_delta<T: Scalar>(eta: T, pi: T, alpha: T, sigma: T, gamma: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    if eta == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let s = alpha * sigma * sigma;
    let g = |d: T| d * (gamma + pi / (one + d) + s * (one - pi) / (one + s * d)) - eta;

    let (mut lo, mut hi) = (T::zero(), eta / gamma);
    for _ in 0..200 {
        let mid = T::half() * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = delta_cubic(eta, pi, alpha, sigma, gamma);
    let mut root = T::half() * (lo + hi);
    for _ in 0..3 {
        let deriv = (T::lit(3.0) * c[3] * root + T::two() * c[2]) * root + c[1];
        if deriv == T::zero() {
            break;
        }
        let next = root - eval_cubic(&c, root) / deriv;
        if !(next >= T::zero() && next.is_finite()) {
            break;
        }
        root = next;
    }

    // Deflate and make sure no other nonnegative root hides in the quadratic.
    if c[3] > T::zero() {
        let q2 = c[3];
        let q1 = c[2] + c[3] * root;
        let q0 = c[1] + q1 * root;
        let disc = q1 * q1 - T::lit(4.0) * q2 * q0;
        if disc >= T::zero() {
            let sq = disc.sqrt();
            for other in [(-q1 + sq) / (T::two() * q2), (-q1 - sq) / (T::two() * q2)] {
                if other >= T::zero() && (other - root).abs() > T::lit(1e-9) {
                    return Err(Error::Internal(format!(
                        "cubic has a second nonnegative root {other} besides {root}"
                    )));
                }
            }
        }
    }
    Ok(root)
}

pub fn isotropic_stats<T: Scalar>(config: &ExperimentConfig) -> Result<TheoryStats<T>> {
    isotropic_model_stats(&IsotropicModel::from_config(config)?)
}

pub fn isotropic_model_stats<T: Scalar>(model: &IsotropicModel<T>) -> Result<TheoryStats<T>> {
    let r = resolvent_forms(model)?;
    let DerivedRatios { eta, pi, alpha, lambda, .. } = model.ratios;
    let s2 = model.sigma * model.sigma;
    let base = eta / (r.theta * r.theta);
    let traces = TraceTerms { ss: base, sb: s2 * base, bb: s2 * s2 * base };
    let weights = MixWeights { pi, alpha, lambda, delta: r.delta, delta_s: r.delta_s };
    assemble(weights, r.forms, traces)
}

pub(crate) struct IsotropicResolvent<T> {
    pub delta: T,
    pub delta_s: T,
    pub theta: T,
    pub forms: BilinearForms<T>,
}

pub(crate) fn resolvent_forms<T: Scalar>(model: &IsotropicModel<T>) -> Result<IsotropicResolvent<T>> {
    let one = T::one();
    let two = T::two();
    let IsotropicModel { ratios, gamma, mu_norm_sq: m2, sigma, beta, mu_perp_norm } = *model;
    let DerivedRatios { eta, pi, alpha, .. } = ratios;
    if !(m2 > T::zero() && sigma > T::zero()) {
        return Err(Error::InvalidInput("mu_norm_sq and sigma must be positive".into()));
    }

    let s2 = sigma * sigma;
    let delta = solve_isotropic_delta(eta, pi, alpha, sigma, gamma)?;
    let delta_s = alpha * s2 * delta;
    let theta = gamma + pi / (one + delta) + alpha * s2 * (one - pi) / (one + delta_s);

    let kr = pi / (one + delta);
    let ks = alpha * (one - pi) / (one + delta_s);
    let b2m2 = beta * beta * m2;
    let mb2 = b2m2 + mu_perp_norm * mu_perp_norm;
    let bm = beta * m2;

    let den1 = theta + ks * mb2;
    let den2 = theta + kr * m2;
    let th2 = theta * theta;

    let m_r1_m = m2 / theta * (one - ks * b2m2 / den1);
    let b_r2_m = bm / den2;
    let b_r2_b = (mb2 - kr * b2m2 * m2 / den2) / theta;
    let m_r1sq_m = m2 / th2 + ks * b2m2 * m2 / (th2 * den1) * (ks * mb2 / den1 - two);
    let b_r2sq_b = mb2 / th2 - kr * b2m2 * m2 * (kr * m2 + two * theta) / (th2 * den2 * den2);
    let b_r2r1_m = bm / th2
        * (one - ks * mb2 / den1 - kr * m2 / den2 + kr * ks * b2m2 * m2 / (den2 * den1));

    let z1 = one + kr * m_r1_m;
    let z2 = one + ks * b_r2_b;
    let mq2m = m_r1sq_m / (z1 * z1);
    let bq2b = b_r2sq_b / (z2 * z2);
    let mq2b = b_r2r1_m / (z1 * z2);
    let forms = BilinearForms {
        mqm: m_r1_m / z1,
        mqb: b_r2_m / z2,
        bqb: b_r2_b / z2,
        mq2m,
        mq2b,
        bq2b,
        mqcqm: s2 * mq2m,
        mqcqb: s2 * mq2b,
        bqcqb: s2 * bq2b,
    };
    Ok(IsotropicResolvent { delta, delta_s, theta, forms })
}
