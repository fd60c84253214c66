//! The coupled fixed point `(δr, δs, δg)` for real data, synthetic data, and
//! generator-induced shift.
//!
//! ```text
//! b  = γ + π/(1+δr) + α(1−π)/((1+δs)(1+δg))
//! δg = α(1−π)/(1+δs) · η̂/b
//! δr = (η/η̂) · (1+δs)/(α(1−π)) · δg
//! δs = α δr/(1+δg)
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deltas<T> {
    pub delta_r: T,
    pub delta_s: T,
    pub delta_g: T,
    /// Sup-norm of the last update.
    pub residual: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol: T::lit(1e-12),
            max_iter: 100_000,
        }
    }
}

/// Inputs of the fixed point. `eta_hat = 0` is accepted as the no-shift limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaInputs<T> {
    pub eta: T,
    pub eta_hat: T,
    pub pi: T,
    pub alpha: T,
    pub gamma: T,
}

impl<T: Scalar> DeltaInputs<T> {
    fn validate(&self) -> Result<()> {
        let finite = [self.eta, self.eta_hat, self.pi, self.alpha, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite fixed-point input".into()));
        }
        if self.eta < T::zero() || self.eta_hat < T::zero() {
            return Err(Error::InvalidInput("eta and eta_hat must be nonnegative".into()));
        }
        let unit = T::zero()..=T::one();
        if !unit.contains(&self.pi) || !unit.contains(&self.alpha) {
            return Err(Error::InvalidInput("pi and alpha must lie in [0, 1]".into()));
        }
        if self.gamma <= T::zero() {
            return Err(Error::InvalidInput("gamma must be positive".into()));
        }
        Ok(())
    }

    /// Weight α(1−π) of the kept synthetic block.
    pub fn synthetic_weight(&self) -> T {
        self.alpha * (T::one() - self.pi)
    }

    /// The ledger's `b` at a given triple.
    pub fn b(&self, delta_r: T, delta_s: T, delta_g: T) -> T {
        let one = T::one();
        self.gamma
            + self.pi / (one + delta_r)
            + self.synthetic_weight() / ((one + delta_s) * (one + delta_g))
    }

    /// Right-hand side of the system with every input taken from `(δr, δs, δg)`.
    pub fn map(&self, delta_r: T, delta_s: T, delta_g: T) -> (T, T, T) {
        let one = T::one();
        let weight = self.synthetic_weight();
        if weight == T::zero() {
            return (self.eta / (self.gamma + self.pi / (one + delta_r)), T::zero(), T::zero());
        }
        let b = self.b(delta_r, delta_s, delta_g);
        let g = weight / (one + delta_s) * self.eta_hat / b;
        let r = if self.eta_hat > T::zero() {
            self.eta / self.eta_hat * (one + delta_s) / weight * delta_g
        } else {
            self.eta / b
        };
        let s = self.alpha * delta_r / (one + delta_g);
        (r, s, g)
    }
}

/// Positive root of `γδ² + (γ + π − η)δ − η = 0`, i.e. `δ = η/(γ + π/(1+δ))`.
fn real_only_delta<T: Scalar>(eta: T, pi: T, gamma: T) -> T {
    let lin = gamma + pi - eta;
    let disc = (lin * lin + T::lit(4.0) * gamma * eta).sqrt();
    if lin >= T::zero() {
        T::two() * eta / (lin + disc)
    } else {
        (disc - lin) / (T::two() * gamma)
    }
}

/// Solves the fixed point by Gauss–Seidel sweeps (δg, then δr, then δs) from
/// zero. A sweep whose update grew relative to the previous one is halved.
pub fn solve_deltas<T: Scalar>(inputs: DeltaInputs<T>, opts: SolverOptions<T>) -> Result<Deltas<T>> {
    inputs.validate()?;
    let one = T::one();

    if inputs.synthetic_weight() == T::zero() {
        let delta_r = real_only_delta(inputs.eta, inputs.pi, inputs.gamma);
        let residual =
            (delta_r - inputs.eta / (inputs.gamma + inputs.pi / (one + delta_r))).abs();
        return Ok(Deltas {
            delta_r,
            delta_s: T::zero(),
            delta_g: T::zero(),
            residual,
            iterations: 0,
        });
    }

    let weight = inputs.synthetic_weight();
    let (mut dr, mut ds, mut dg) = (T::zero(), T::zero(), T::zero());
    let mut last = T::infinity();
    let mut residual = T::infinity();

    for it in 1..=opts.max_iter {
        let b = inputs.b(dr, ds, dg);
        let mut g = weight / (one + ds) * inputs.eta_hat / b;
        let mut r = if inputs.eta_hat > T::zero() {
            inputs.eta / inputs.eta_hat * (one + ds) / weight * g
        } else {
            inputs.eta / b
        };
        let mut s = inputs.alpha * r / (one + g);

        residual = (g - dg).abs().max((r - dr).abs()).max((s - ds).abs());
        if !residual.is_finite() || !(r.is_finite() && s.is_finite() && g.is_finite()) {
            return Err(Error::NonFinite("delta fixed-point iteration"));
        }
        if residual > last {
            g = dg + T::half() * (g - dg);
            r = dr + T::half() * (r - dr);
            s = ds + T::half() * (s - ds);
        }
        dr = r;
        ds = s;
        dg = g;
        if residual <= opts.tol {
            return Ok(Deltas {
                delta_r: dr,
                delta_s: ds,
                delta_g: dg,
                residual,
                iterations: it,
            });
        }
        last = residual;
    }

    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: to_f64(residual),
    })
}
