//! Deterministic synthetic covariance `C = P diag(d) Pᵀ` with arbitrary
//! synthetic mean `μβ`.

use nalgebra::{DMatrix, DVector};

use crate::config::DerivedRatios;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};
use crate::theory::deltas::SolverOptions;
use crate::theory::moments::{assemble, BilinearForms, MixWeights, TraceTerms};
use crate::theory::stats::TheoryStats;

/// Converged `(δ, δS)` of the eigen-sum system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDeltas<T> {
    pub delta: T,
    pub delta_s: T,
    pub residual: T,
    pub iterations: usize,
}

fn denominators<T: Scalar>(d: &[T], pi: T, weight: T, gamma: T, delta: T, delta_s: T) -> Vec<T> {
    let one = T::one();
    let real = pi / (one + delta);
    let synth = weight / (one + delta_s);
    d.iter().map(|&di| gamma + real + synth * di).collect()
}

/// Damped Picard iteration for
/// `δ = (η/p) Σ 1/Δi`, `δS = α(η/p) Σ di/Δi`,
/// `Δi = γ + π/(1+δ) + α(1−π)di/(1+δS)`.
pub fn solve_spectral_deltas<T: Scalar>(
    d: &[T],
    eta: T,
    pi: T,
    alpha: T,
    gamma: T,
    opts: SolverOptions<T>,
) -> Result<SpectralDeltas<T>> {
    if d.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let scale = eta / T::from_usize(d.len()).expect("length fits");
    let weight = alpha * (T::one() - pi);
    let (mut delta, mut delta_s) = (T::zero(), T::zero());
    let mut last = T::infinity();
    let mut residual = T::infinity();
    for it in 1..=opts.max_iter {
        let den = denominators(d, pi, weight, gamma, delta, delta_s);
        let mut next = T::zero();
        let mut next_s = T::zero();
        for (&di, &dd) in d.iter().zip(&den) {
            next += T::one() / dd;
            next_s += di / dd;
        }
        next *= scale;
        next_s *= alpha * scale;
        residual = (next - delta).abs().max((next_s - delta_s).abs());
        if !residual.is_finite() {
            return Err(Error::NonFinite("spectral fixed-point iteration"));
        }
        if residual > last {
            next = delta + T::half() * (next - delta);
            next_s = delta_s + T::half() * (next_s - delta_s);
        }
        delta = next;
        delta_s = next_s;
        if residual <= opts.tol {
            return Ok(SpectralDeltas { delta, delta_s, residual, iterations: it });
        }
        last = residual;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: to_f64(residual),
    })
}

fn check_inputs<T: Scalar>(
    d: &[T],
    mu: &DVector<T>,
    mu_beta: &DVector<T>,
    basis: &DMatrix<T>,
    gamma: T,
) -> Result<()> {
    let p = d.len();
    if p == 0 || mu.len() != p || mu_beta.len() != p || basis.shape() != (p, p) {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} eigenvalues, mu {}, mu_beta {}, basis {:?}",
            p,
            mu.len(),
            mu_beta.len(),
            basis.shape()
        )));
    }
    if d.iter().any(|&v| !(v > T::zero() && v.is_finite())) {
        return Err(Error::InvalidInput("covariance eigenvalues must be positive".into()));
    }
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let gram = basis.transpose() * basis;
    let tol = T::lit(1e-6);
    for i in 0..p {
        for j in 0..p {
            let target = if i == j { T::one() } else { T::zero() };
            if (gram[(i, j)] - target).abs() > tol {
                return Err(Error::InvalidInput("cov_basis is not orthogonal".into()));
            }
        }
    }
    Ok(())
}

/// Deterministic equivalent `Q̄ = (π/(1+δ) Σ + α(1−π)/(1+δS) Σβ + γI)⁻¹`,
/// built through a rank-two Woodbury update of the diagonalizable part.
pub fn deterministic_equivalent<T: Scalar>(
    d: &[T],
    mu: &DVector<T>,
    mu_beta: &DVector<T>,
    basis: &DMatrix<T>,
    ratios: &DerivedRatios<T>,
    gamma: T,
    deltas: &SpectralDeltas<T>,
) -> DMatrix<T> {
    let one = T::one();
    let DerivedRatios { pi, alpha, .. } = *ratios;
    let kr = pi / (one + deltas.delta);
    let ks = alpha * (one - pi) / (one + deltas.delta_s);
    let den = denominators(d, pi, alpha * (one - pi), gamma, deltas.delta, deltas.delta_s);

    let inv_diag = DVector::from_iterator(d.len(), den.iter().map(|&v| one / v));
    let scaled = DMatrix::from_fn(d.len(), d.len(), |i, j| basis[(i, j)] * inv_diag[j]);
    let a_inv = &scaled * basis.transpose();

    let w1 = &a_inv * mu;
    let w2 = &a_inv * mu_beta;
    let (g11, g12, g22) = (mu.dot(&w1), mu.dot(&w2), mu_beta.dot(&w2));

    // K = D (I + G D)⁻¹ with D = diag(kr, ks).
    let (m11, m12, m21, m22) = (one + g11 * kr, g12 * ks, g12 * kr, one + g22 * ks);
    let det = m11 * m22 - m12 * m21;
    let (i11, i12, i21, i22) = (m22 / det, -m12 / det, -m21 / det, m11 / det);
    let (k11, k12, k21, k22) = (kr * i11, kr * i12, ks * i21, ks * i22);

    let mut q = a_inv;
    let p = d.len();
    for r in 0..p {
        for c in 0..p {
            let corr = w1[r] * (k11 * w1[c] + k12 * w2[c]) + w2[r] * (k21 * w1[c] + k22 * w2[c]);
            q[(r, c)] -= corr;
        }
    }
    q
}

pub fn general_covariance_stats<T: Scalar>(
    cov_eigenvalues: &[T],
    mu: &DVector<T>,
    mu_beta: &DVector<T>,
    cov_basis: &DMatrix<T>,
    ratios: &DerivedRatios<T>,
    gamma: T,
) -> Result<TheoryStats<T>> {
    check_inputs(cov_eigenvalues, mu, mu_beta, cov_basis, gamma)?;
    let d = cov_eigenvalues;
    let DerivedRatios { eta, pi, alpha, lambda, .. } = *ratios;
    let deltas = solve_spectral_deltas(d, eta, pi, alpha, gamma, SolverOptions::default())?;
    let q = deterministic_equivalent(d, mu, mu_beta, cov_basis, ratios, gamma, &deltas);

    let cov = DMatrix::from_fn(d.len(), d.len(), |i, j| cov_basis[(i, j)] * d[j]) * cov_basis.transpose();
    let qm = &q * mu;
    let qb = &q * mu_beta;
    let cqm = &cov * &qm;
    let cqb = &cov * &qb;
    let forms = BilinearForms {
        mqm: mu.dot(&qm),
        mqb: mu.dot(&qb),
        bqb: mu_beta.dot(&qb),
        mq2m: qm.dot(&qm),
        mq2b: qm.dot(&qb),
        bq2b: qb.dot(&qb),
        mqcqm: qm.dot(&cqm),
        mqcqb: qm.dot(&cqb),
        bqcqb: qb.dot(&cqb),
    };

    let one = T::one();
    let den = denominators(d, pi, alpha * (one - pi), gamma, deltas.delta, deltas.delta_s);
    let scale = eta / T::from_usize(d.len()).expect("length fits");
    let mut traces = TraceTerms { ss: T::zero(), sb: T::zero(), bb: T::zero() };
    for (&di, &dd) in d.iter().zip(&den) {
        let inv2 = one / (dd * dd);
        traces.ss += inv2;
        traces.sb += di * inv2;
        traces.bb += di * di * inv2;
    }
    traces.ss *= scale;
    traces.sb *= scale;
    traces.bb *= scale;

    let weights = MixWeights { pi, alpha, lambda, delta: deltas.delta, delta_s: deltas.delta_s };
    assemble(weights, forms, traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::isotropic::{isotropic_model_stats, IsotropicModel};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_orthogonal(p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(p, p, |_, _| StandardNormal.sample(&mut rng));
        g.qr().q()
    }

    fn ratios(eta: f64, pi: f64, alpha: f64, lambda: f64) -> DerivedRatios<f64> {
        DerivedRatios { eta, eta_hat: 0.0, pi, eta_s: None, alpha, lambda }
    }

    fn isotropic_pair(p: usize, basis: &DMatrix<f64>, r: DerivedRatios<f64>, gamma: f64,
                      mu_norm: f64, sigma: f64, beta: f64, perp: f64) -> (f64, f64, f64, f64) {
        let mut mu = DVector::zeros(p);
        mu[0] = mu_norm;
        let mut mb = &mu * beta;
        mb[1] = perp;
        let d = vec![sigma * sigma; p];
        let g = general_covariance_stats(&d, &mu, &mb, basis, &r, gamma).unwrap();
        let iso = isotropic_model_stats(&IsotropicModel {
            ratios: r, gamma, mu_norm_sq: mu_norm * mu_norm, sigma, beta, mu_perp_norm: perp,
        })
        .unwrap();
        (g.accuracy, iso.accuracy, g.second_moment, iso.second_moment)
    }

    #[test]
    fn identity_spectrum_matches_isotropic() {
        let p = 40;
        let basis = random_orthogonal(p, 3);
        let (ga, ia, gn, inu) = isotropic_pair(p, &basis, ratios(0.3, 0.5, 0.9, 0.7), 1.0, 1.0, 1.0, 1.0, 0.0);
        assert!((ga - ia).abs() < 1e-8 && (gn - inu).abs() < 1e-8);
    }

    #[test]
    fn scaled_spectrum_with_shift_matches_isotropic() {
        let p = 40;
        let basis = random_orthogonal(p, 5);
        let alpha = 0.9 * 0.9 + 0.2 * 0.1;
        let lambda = 0.9 * 0.9 - 0.2 * 0.1;
        let (ga, ia, gn, inu) =
            isotropic_pair(p, &basis, ratios(0.3, 0.5, alpha, lambda), 1.0, 1.0, 1.5, 0.9, 0.2);
        assert!((ga - ia).abs() < 1e-8, "{ga} vs {ia}");
        assert!((gn - inu).abs() < 1e-8, "{gn} vs {inu}");
    }

    #[test]
    fn woodbury_matches_dense_inverse() {
        let p = 12;
        let basis = random_orthogonal(p, 9);
        let d: Vec<f64> = (0..p).map(|i| if i % 2 == 0 { 0.5 } else { 2.0 }).collect();
        let mu = DVector::from_fn(p, |i, _| 0.1 * (i as f64 + 1.0));
        let mb = DVector::from_fn(p, |i, _| 0.05 * (p - i) as f64);
        let r = ratios(0.4, 0.3, 0.8, 0.5);
        let deltas = solve_spectral_deltas(&d, r.eta, r.pi, r.alpha, 1.0, SolverOptions::default()).unwrap();
        let q = deterministic_equivalent(&d, &mu, &mb, &basis, &r, 1.0, &deltas);
        let cov = DMatrix::from_fn(p, p, |i, j| basis[(i, j)] * d[j]) * basis.transpose();
        let kr = r.pi / (1.0 + deltas.delta);
        let ks = r.alpha * (1.0 - r.pi) / (1.0 + deltas.delta_s);
        let sigma = &mu * mu.transpose() + DMatrix::identity(p, p);
        let sigma_b = &mb * mb.transpose() + &cov;
        let dense = (sigma * kr + sigma_b * ks + DMatrix::identity(p, p)).try_inverse().unwrap();
        assert!((q - dense).amax() < 1e-13);
    }

    #[test]
    fn rejects_bad_shapes_and_spectra() {
        let p = 4;
        let basis = DMatrix::identity(p, p);
        let mu = DVector::from_element(p, 0.3);
        let r = ratios(0.3, 0.5, 1.0, 1.0);
        assert!(general_covariance_stats(&[1.0; 3], &mu, &mu, &basis, &r, 1.0).is_err());
        assert!(general_covariance_stats(&[1.0, 1.0, 0.0, 1.0], &mu, &mu, &basis, &r, 1.0).is_err());
        let skew = DMatrix::from_element(p, p, 0.5);
        assert!(general_covariance_stats(&[1.0; 4], &mu, &mu, &skew, &r, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn unit_spectrum_agrees_with_isotropic(eta in 0.05..1.5f64, pi in 0.0..=1.0f64,
                                               alpha in 0.1..=1.0f64, frac in -1.0..=1.0f64,
                                               gamma in 0.3..3.0f64, mu in 0.3..2.0f64) {
            let p = 16;
            let basis = random_orthogonal(p, 11);
            let (ga, ia, gn, inu) =
                isotropic_pair(p, &basis, ratios(eta, pi, alpha, frac * alpha), gamma, mu, 1.0, 1.0, 0.0);
            prop_assert!((ga - ia).abs() < 1e-8);
            prop_assert!((gn - inu).abs() < 1e-8);
        }
    }
}
