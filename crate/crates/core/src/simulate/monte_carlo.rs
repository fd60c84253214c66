//! Repeated end-to-end runs of the mixed-data pipeline.

use rayon::prelude::*;
use serde::Serialize;

use super::data::{fit_generator, mean_vector, prune, sample_real, sample_synthetic, GeneratorModel, LabeledMatrix};
use super::ridge::{decision_stats, train_ridge, RidgeModel};
use super::rng::{stream, Purpose};
use crate::config::ExperimentConfig;
use crate::error::Result;

/// Where each trial's generator comes from.
#[derive(Debug, Clone, Default)]
pub enum GeneratorSpec {
    /// Fit on `n_hat` fresh real samples, independent of the classifier's data.
    #[default]
    Fitted,
    /// Use the same generator in every trial.
    Fixed(GeneratorModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub accuracy: f64,
    pub decision_mean: f64,
    pub decision_var: f64,
    /// Synthetic samples that survived pruning.
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub mean_accuracy: f64,
    /// Sample standard deviation across trials; zero for a single trial.
    pub std_accuracy: f64,
    pub mean_decision_mean: f64,
    pub mean_decision_var: f64,
    pub outcomes: Vec<TrialOutcome>,
}

/// Trains the classifier of one trial; the test stream is untouched.
pub fn train_trial(config: &ExperimentConfig, trial: u64, generator: &GeneratorSpec) -> Result<(RidgeModel, usize)> {
    config.validate()?;
    let seed = config.seed;
    let mu = mean_vector(config.p, config.mu_norm);
    let real = sample_real(config.n, config.p, &mu, &mut stream(seed, trial, Purpose::RealTrain));
    let synthetic = if config.m == 0 {
        LabeledMatrix::empty(config.p)
    } else {
        let fitted;
        let gen = match generator {
            GeneratorSpec::Fixed(g) => g,
            GeneratorSpec::Fitted => {
                let mut r = stream(seed, trial, Purpose::GeneratorTrain);
                fitted = fit_generator(&sample_real(config.n_hat, config.p, &mu, &mut r))?;
                &fitted
            }
        };
        let raw = sample_synthetic(config.m, gen, config.epsilon, &mut stream(seed, trial, Purpose::Synthetic));
        prune(&raw, config.rho, config.phi, &mut stream(seed, trial, Purpose::Prune))?
    };
    let kept = synthetic.kept_count();
    Ok((train_ridge(&real, &synthetic, config.gamma)?, kept))
}

/// One full pipeline run. Depends only on (config, trial).
pub fn run_trial(
    config: &ExperimentConfig,
    trial: u64,
    n_test: usize,
    generator: &GeneratorSpec,
) -> Result<TrialOutcome> {
    let (model, kept) = train_trial(config, trial, generator)?;
    let mu = mean_vector(config.p, config.mu_norm);
    let stats = decision_stats(&model, &mu, n_test, &mut stream(config.seed, trial, Purpose::Test))?;
    Ok(TrialOutcome {
        accuracy: stats.accuracy,
        decision_mean: stats.mean,
        decision_var: stats.variance,
        kept,
    })
}

pub fn monte_carlo(config: &ExperimentConfig, trials: usize, n_test: usize) -> Result<MonteCarloSummary> {
    monte_carlo_with(config, trials, n_test, &GeneratorSpec::Fitted)
}

/// Runs trials `0..trials` in parallel and folds them in trial order.
pub fn monte_carlo_with(
    config: &ExperimentConfig,
    trials: usize,
    n_test: usize,
    generator: &GeneratorSpec,
) -> Result<MonteCarloSummary> {
    config.validate()?;
    if trials == 0 {
        return Err(crate::Error::InvalidInput("trials must be at least 1".into()));
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, t, n_test, generator))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(outcomes))
}

fn summarize(outcomes: Vec<TrialOutcome>) -> MonteCarloSummary {
    let k = outcomes.len() as f64;
    let acc: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
    let (mean_accuracy, var) = super::ridge::mean_and_variance(&acc);
    MonteCarloSummary {
        trials: outcomes.len(),
        mean_accuracy,
        std_accuracy: var.sqrt(),
        mean_decision_mean: outcomes.iter().map(|o| o.decision_mean).sum::<f64>() / k,
        mean_decision_var: outcomes.iter().map(|o| o.decision_var).sum::<f64>() / k,
        outcomes,
    }
}
