//! Closed-form ridge classifier and its empirical evaluation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::data::LabeledMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: DVector<f64>,
    pub gamma: f64,
}

/// Solves `((1/N) X Xᵀ + γ I) w = (1/N) X y` over real and synthetic columns.
///
/// Pruned synthetic columns contribute zero but still count in N = n + m.
pub fn train_ridge(real: &LabeledMatrix, synthetic: &LabeledMatrix, gamma: f64) -> Result<RidgeModel> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::config("gamma", format!("must be a positive finite number, got {gamma}")));
    }
    real.check()?;
    synthetic.check()?;
    let p = real.dim();
    if synthetic.dim() != p {
        return Err(Error::InvalidInput(format!(
            "real data has dimension {p}, synthetic data {}",
            synthetic.dim()
        )));
    }
    let total = real.len() + synthetic.len();
    if total == 0 {
        return Err(Error::InvalidInput("no training columns".into()));
    }
    if real.features.iter().chain(synthetic.features.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }

    let kept = synthetic.kept();
    let mut gram = &real.features * real.features.transpose();
    gram += &kept.features * kept.features.transpose();
    let mut rhs = &real.features * signs(&real.labels);
    rhs += &kept.features * signs(&kept.labels);

    let inv_n = 1.0 / total as f64;
    gram *= inv_n;
    gram = (&gram + gram.transpose()) * 0.5;
    for i in 0..p {
        gram[(i, i)] += gamma;
    }
    rhs *= inv_n;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Internal("ridge system is not positive definite".into()))?;
    let weights = chol.solve(&rhs);
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge weights"));
    }
    Ok(RidgeModel { weights, gamma })
}

fn signs(labels: &[i8]) -> DVector<f64> {
    DVector::from_iterator(labels.len(), labels.iter().map(|&y| f64::from(y)))
}

/// Empirical moments of `y wᵀx` on fresh test points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStats {
    pub mean: f64,
    /// Sample variance (n − 1 denominator).
    pub variance: f64,
    pub accuracy: f64,
}

/// Draws `n_test` points of `x = yμ + z` with uniform labels and scores `w`.
///
/// A score of exactly zero is predicted as +1.
pub fn decision_stats<R: Rng + ?Sized>(
    model: &RidgeModel,
    mu: &DVector<f64>,
    n_test: usize,
    rng: &mut R,
) -> Result<DecisionStats> {
    if n_test == 0 {
        return Err(Error::InvalidInput("n_test must be at least 1".into()));
    }
    check_dim(model, mu)?;
    let w_mu = model.weights.dot(mu);
    let mut correct = 0usize;
    let mut values = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let y: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let score = y * w_mu + noise_projection(&model.weights, rng);
        if (score >= 0.0) == (y > 0.0) {
            correct += 1;
        }
        values.push(y * score);
    }
    let (mean, variance) = mean_and_variance(&values);
    Ok(DecisionStats { mean, variance, accuracy: correct as f64 / n_test as f64 })
}

/// Scores `wᵀx` of `n_test` fresh points from class +1.
pub fn decision_scores<R: Rng + ?Sized>(
    model: &RidgeModel,
    mu: &DVector<f64>,
    n_test: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dim(model, mu)?;
    let w_mu = model.weights.dot(mu);
    Ok((0..n_test).map(|_| w_mu + noise_projection(&model.weights, rng)).collect())
}

fn check_dim(model: &RidgeModel, mu: &DVector<f64>) -> Result<()> {
    if model.weights.len() != mu.len() {
        return Err(Error::InvalidInput(format!(
            "weights have dimension {}, mean {}",
            model.weights.len(),
            mu.len()
        )));
    }
    Ok(())
}

// wᵀz with z drawn coordinate by coordinate.
fn noise_projection<R: Rng + ?Sized>(w: &DVector<f64>, rng: &mut R) -> f64 {
    w.iter().map(|&wi| wi * rng.sample::<f64, _>(StandardNormal)).sum()
}

pub(crate) fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (k - 1.0))
}
