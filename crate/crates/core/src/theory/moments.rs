//! Shared assembly of `(m_q, ν_q)` from bilinear forms of the deterministic
//! equivalent `Q̄`.
//!
//! With `Σ = μμᵀ + I` and `Σβ = μβμβᵀ + C`, the forms below are evaluated at
//! the converged `(δ, δS)` and `E[QΣQ] ≈ ((1−b2)/h) Q̄ΣQ̄ + (b1/h) Q̄ΣβQ̄`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::stats::TheoryStats;

/// `x Q̄ y`, `x Q̄² y` and `x Q̄CQ̄ y` for `x, y ∈ {μ, μβ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BilinearForms<T> {
    pub mqm: T,
    pub mqb: T,
    pub bqb: T,
    pub mq2m: T,
    pub mq2b: T,
    pub bq2b: T,
    pub mqcqm: T,
    pub mqcqb: T,
    pub bqcqb: T,
}

/// Normalized traces `(1/N)Tr(Q̄²)`, `(1/N)Tr(CQ̄²)`, `(1/N)Tr(CQ̄CQ̄)`; the
/// rank-one parts of Σ and Σβ contribute O(1/N) and are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TraceTerms<T> {
    pub ss: T,
    pub sb: T,
    pub bb: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MixWeights<T> {
    pub pi: T,
    pub alpha: T,
    pub lambda: T,
    pub delta: T,
    pub delta_s: T,
}

pub(crate) fn assemble<T: Scalar>(
    w: MixWeights<T>,
    f: BilinearForms<T>,
    t: TraceTerms<T>,
) -> Result<TheoryStats<T>> {
    let one = T::one();
    let two = T::two();
    let MixWeights { pi, alpha, lambda, delta, delta_s } = w;
    let real_sq = (one + delta) * (one + delta);
    let synth_sq = (one + delta_s) * (one + delta_s);

    let a1 = pi / real_sq * t.ss;
    let a2 = pi / real_sq * t.sb;
    let b1 = alpha * (one - pi) / synth_sq * t.sb;
    let b2 = alpha * (one - pi) / synth_sq * t.bb;
    let h = (one - b2) * (one - a1) - a2 * b1;
    if !(h > T::zero()) {
        return Err(Error::InvalidRegime(format!("h = {h} is not positive")));
    }
    let (ws, wb) = ((one - b2) / h, b1 / h);

    let e_mm = ws * (f.mqm * f.mqm + f.mq2m) + wb * (f.mqb * f.mqb + f.mqcqm);
    let e_bb = ws * (f.mqb * f.mqb + f.bq2b) + wb * (f.bqb * f.bqb + f.bqcqb);
    let e_mb = ws * (f.mqm * f.mqb + f.mq2b) + wb * (f.mqb * f.bqb + f.mqcqb);
    let t1 = ws * t.ss + wb * t.sb;
    let t2 = ws * t.sb + wb * t.bb;

    let kr = pi / (one + delta);
    let kl = lambda * (one - pi) / (one + delta_s);
    let mean = kr * f.mqm + kl * f.mqb;

    let second = kr * kr * e_mm
        + kl * kl * e_bb
        + two * kr * kl * e_mb
        + pi * t1 / real_sq * (one - two * mean)
        + (one - pi) * t2 / synth_sq * (alpha - two * lambda * (kl * f.bqb + kr * f.mqb));
    TheoryStats::from_moments(mean, second)
}
