//! Experiment parameterization shared by the theory and the simulator.

use std::path::Path;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance used when comparing a noise rate against the critical noise level.
pub const CRITICAL_EPSILON_TOL: f64 = 1e-12;

fn default_sigma() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    1.0
}

/// All free parameters of one experiment.
///
/// Serialized as a flat JSON object with exactly these snake_case keys.
/// `sigma`, `beta` and `mu_perp_norm` only affect the isotropic
/// deterministic-covariance model and default to the shift-free values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Feature dimension.
    pub p: usize,
    /// Real samples used by the classifier.
    pub n: usize,
    /// Synthetic samples (before pruning).
    pub m: usize,
    /// Real samples used to fit the generator.
    pub n_hat: usize,
    pub mu_norm: f64,
    /// Ridge penalty.
    pub gamma: f64,
    /// Synthetic label-noise rate.
    pub epsilon: f64,
    /// Probability the verifier keeps a wrongly labelled sample.
    pub rho: f64,
    /// Probability the verifier keeps a correctly labelled sample.
    pub phi: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub mu_perp_norm: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// The oracle-supervision mixture used throughout the examples: p = 200,
    /// n = m = n̂ = 1000, ‖μ‖ = 0.7, γ = 1, ε = 0.2, (ρ, φ) = (0, 1).
    fn default() -> Self {
        ExperimentConfig {
            p: 200,
            n: 1000,
            m: 1000,
            n_hat: 1000,
            mu_norm: 0.7,
            gamma: 1.0,
            epsilon: 0.2,
            rho: 0.0,
            phi: 1.0,
            sigma: 1.0,
            beta: 1.0,
            mu_perp_norm: 0.0,
            seed: 0,
        }
    }
}

fn check_probability(field: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::config(field, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(field, format!("must be a positive finite number, got {v}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::config("p", "must be positive"));
        }
        if self.n_hat == 0 {
            return Err(Error::config("n_hat", "must be positive"));
        }
        if self.n + self.m == 0 {
            return Err(Error::config("m", "n + m must be at least 1"));
        }
        check_positive("mu_norm", self.mu_norm)?;
        check_positive("gamma", self.gamma)?;
        check_probability("epsilon", self.epsilon)?;
        check_probability("rho", self.rho)?;
        check_probability("phi", self.phi)?;
        check_positive("sigma", self.sigma)?;
        if !self.beta.is_finite() {
            return Err(Error::config("beta", "must be finite"));
        }
        if !(self.mu_perp_norm.is_finite() && self.mu_perp_norm >= 0.0) {
            return Err(Error::config("mu_perp_norm", "must be nonnegative and finite"));
        }
        Ok(())
    }

    /// Parses a JSON config and validates it.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn derive<T: Scalar>(&self) -> Result<DerivedRatios<T>> {
        derive(self)
    }

    pub fn mu_norm_sq(&self) -> f64 {
        self.mu_norm * self.mu_norm
    }
}

/// Reads, parses, and validates a config file. Unknown keys are rejected.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|source| Error::ConfigParse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Pruner moments `(α, λ) = (E[q], E[q ỹ ȳ])`.
///
/// Generic over any numeric type so the identities can be checked in exact
/// rational arithmetic.
pub fn pruner_moments<T: Num + Clone>(epsilon: T, rho: T, phi: T) -> (T, T) {
    let kept_correct = phi * (T::one() - epsilon.clone());
    let kept_wrong = rho * epsilon;
    (kept_correct.clone() + kept_wrong.clone(), kept_correct - kept_wrong)
}

/// Asymptotic ratios of a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedRatios<T> {
    /// p / (n + m)
    pub eta: T,
    /// p / n̂
    pub eta_hat: T,
    /// n / (n + m)
    pub pi: T,
    /// p / m, absent when m = 0.
    pub eta_s: Option<T>,
    pub alpha: T,
    pub lambda: T,
}

pub fn derive<T: Scalar>(config: &ExperimentConfig) -> Result<DerivedRatios<T>> {
    config.validate()?;
    let lit = |x: f64| T::lit(x);
    let p = lit(config.p as f64);
    let total = lit((config.n + config.m) as f64);
    let (alpha, lambda) =
        pruner_moments(lit(config.epsilon), lit(config.rho), lit(config.phi));
    Ok(DerivedRatios {
        eta: p / total,
        eta_hat: p / lit(config.n_hat as f64),
        pi: lit(config.n as f64) / total,
        eta_s: (config.m > 0).then(|| p / lit(config.m as f64)),
        alpha,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            p: 500,
            n: 1000,
            m: 1000,
            n_hat: 1000,
            epsilon: 0.0,
            rho: 0.0,
            phi: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn derive_basic_ratios() {
        let r = base().derive::<f64>().unwrap();
        assert_eq!(r.eta, 0.25);
        assert_eq!(r.eta_hat, 0.5);
        assert_eq!(r.pi, 0.5);
        assert_eq!(r.eta_s, Some(0.5));
        assert_eq!(r.alpha, 1.0);
        assert_eq!(r.lambda, 1.0);
    }

    #[test]
    fn symmetric_noise_cancels() {
        let cfg = ExperimentConfig {
            epsilon: 0.5,
            rho: 0.5,
            phi: 0.5,
            ..base()
        };
        let r = cfg.derive::<f64>().unwrap();
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn critical_noise_zeroes_lambda() {
        let cfg = ExperimentConfig {
            epsilon: 8.0 / 11.0,
            rho: 0.3,
            phi: 0.8,
            ..base()
        };
        let r = cfg.derive::<f64>().unwrap();
        assert!(r.lambda.abs() < 1e-15, "lambda = {}", r.lambda);
    }

    #[test]
    fn eta_s_absent_without_synthetic() {
        let cfg = ExperimentConfig { m: 0, ..base() };
        assert_eq!(cfg.derive::<f64>().unwrap().eta_s, None);
    }

    #[test]
    fn rejects_bad_fields() {
        let cases: Vec<(&str, ExperimentConfig)> = vec![
            ("gamma", ExperimentConfig { gamma: 0.0, ..base() }),
            ("gamma", ExperimentConfig { gamma: -1.0, ..base() }),
            ("p", ExperimentConfig { p: 0, ..base() }),
            ("n_hat", ExperimentConfig { n_hat: 0, ..base() }),
            ("m", ExperimentConfig { n: 0, m: 0, ..base() }),
            ("epsilon", ExperimentConfig { epsilon: 1.5, ..base() }),
            ("rho", ExperimentConfig { rho: -0.1, ..base() }),
            ("phi", ExperimentConfig { phi: f64::NAN, ..base() }),
        ];
        for (field, cfg) in cases {
            match cfg.derive::<f64>() {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected config error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn load_minimal_applies_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"p": 100, "n": 10, "m": 20, "n_hat": 10, "mu_norm": 1.0,
                "gamma": 1.0, "epsilon": 0.1, "rho": 0.2, "phi": 0.9, "seed": 7}"#,
        )
        .unwrap();
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.sigma, 1.0);
        assert_eq!(cfg.beta, 1.0);
        assert_eq!(cfg.mu_perp_norm, 0.0);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn load_rejects_zero_gamma_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"p": 100, "n": 10, "m": 20, "n_hat": 10, "mu_norm": 1.0,
                "gamma": 0, "epsilon": 0.1, "rho": 0.2, "phi": 0.9, "seed": 7}"#,
        )
        .unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn load_rejects_unknown_key_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"p": 100, "n": 10, "m": 20, "n_hat": 10, "mu_norm": 1.0, "gamma": 1,
                "epsilonn": 0.1, "epsilon": 0.1, "rho": 0.2, "phi": 0.9, "seed": 7}"#,
        )
        .unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("epsilonn"), "{err}");
    }

    #[test]
    fn moment_identities_exact_in_rationals() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let (eps, rho, phi) = (q(3, 11), q(2, 7), q(5, 9));
        let (alpha, lambda) = pruner_moments(eps.clone(), rho.clone(), phi.clone());
        let two = q(2, 1);
        assert_eq!(&alpha - &lambda, &two * &rho * &eps);
        assert_eq!(&alpha + &lambda, &two * &phi * (q(1, 1) - &eps));
    }

    proptest! {
        #[test]
        fn moment_identities_float(eps in 0.0..=1.0f64, rho in 0.0..=1.0f64, phi in 0.0..=1.0f64) {
            let (alpha, lambda) = pruner_moments(eps, rho, phi);
            prop_assert!((alpha - lambda - 2.0 * rho * eps).abs() <= 1e-15);
            prop_assert!((alpha + lambda - 2.0 * phi * (1.0 - eps)).abs() <= 1e-15);
            prop_assert!(alpha + 1e-15 >= lambda.abs());
        }

        #[test]
        fn derive_is_pure(p in 1usize..5000, n in 0usize..5000, m in 1usize..5000,
                          n_hat in 1usize..5000, eps in 0.0..=1.0f64) {
            let cfg = ExperimentConfig { p, n, m, n_hat, epsilon: eps, rho: 0.3, phi: 0.8, ..Default::default() };
            let a = cfg.derive::<f64>().unwrap();
            let b = cfg.derive::<f64>().unwrap();
            prop_assert_eq!(a.eta.to_bits(), b.eta.to_bits());
            prop_assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
            prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
            prop_assert!((a.pi * (n + m) as f64 - n as f64).abs() <= 1e-12 * (n + m) as f64);
        }
    }
}
