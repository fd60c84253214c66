//! Subcommand implementations. Each returns a document; writing is left to the caller.

use serde_json::{json, Value};
use synthmix::datasets::{load_csv, estimate_mu_norm, real_data_mixing_run, synthetic_count, LabelColumn, MixingOptions};
use synthmix::simulate::{
    fit_generator, kolmogorov_distance_mp, mean_vector, monte_carlo, monte_carlo_with, sample_real, spectrum,
    stream, GeneratorModel, GeneratorSpec, MonteCarloSummary, Purpose,
};
use synthmix::theory::{
    corollary_synthetic_stats, critical_epsilon, isotropic_stats, marchenko_pastur_density, mp_point_mass,
    mp_support, solve_deltas, theory_for_config, DeltaInputs, SolverOptions,
};
use synthmix::{pruner_moments, ExperimentConfig, Ratios};

use crate::args::{
    Command, CommonArgs, DeltasArgs, EpsilonMode, IngestArgs, MixingArgs, PhaseArgs, SpectrumArgs,
    ValidateArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{metadata, num, opt_num, to_value, Output, Table};
use crate::sweep;

/// A finished document plus, for `validate`, the reason it failed.
#[derive(Debug)]
pub struct Outcome {
    pub output: Output,
    pub failure: Option<String>,
}

impl From<Output> for Outcome {
    fn from(output: Output) -> Self {
        Outcome { output, failure: None }
    }
}

pub fn run(command: &Command) -> CliResult<Outcome> {
    Ok(match command {
        Command::Deltas(a) => deltas(a)?.into(),
        Command::Mixing(a) => mixing(a)?.into(),
        Command::Phase(a) => phase(a)?.into(),
        Command::Spectrum(a) => spectrum_cmd(a)?.into(),
        Command::Theory(a) => theory(a)?.into(),
        Command::Simulate(a) => simulate(a)?.into(),
        Command::Validate(a) => return validate(a),
        Command::Ingest(a) => ingest(a)?.into(),
        Command::Sweep(a) => sweep::run(a)?.into(),
    })
}

pub fn common_of(command: &Command) -> &CommonArgs {
    match command {
        Command::Deltas(a) => &a.common,
        Command::Mixing(a) => &a.common,
        Command::Phase(a) => &a.common,
        Command::Spectrum(a) => &a.common,
        Command::Theory(a) | Command::Simulate(a) => a,
        Command::Validate(a) => &a.common,
        Command::Ingest(a) => &a.common,
        Command::Sweep(a) => &a.common,
    }
}

/// Ratios for a real-valued dimension, used where p varies continuously.
pub fn ratios_at(cfg: &ExperimentConfig, p: f64) -> Ratios {
    let total = (cfg.n + cfg.m) as f64;
    let (alpha, lambda) = pruner_moments(cfg.epsilon, cfg.rho, cfg.phi);
    Ratios {
        eta: p / total,
        eta_hat: p / cfg.n_hat as f64,
        pi: cfg.n as f64 / total,
        eta_s: (cfg.m > 0).then(|| p / cfg.m as f64),
        alpha,
        lambda,
    }
}

/// Joins per-stage failures for a row's error cell.
#[derive(Default)]
pub(crate) struct RowErrors(Vec<String>);

impl RowErrors {
    pub(crate) fn keep<T>(&mut self, stage: &str, r: Result<T, synthmix::Error>) -> Option<T> {
        r.map_err(|e| self.0.push(format!("{stage}: {e}"))).ok()
    }

    pub(crate) fn cell(self) -> String {
        self.0.join("; ")
    }
}

pub(crate) fn empirical(
    cfg: &ExperimentConfig,
    trials: usize,
    n_test: usize,
    generator: &GeneratorSpec,
    errors: &mut RowErrors,
) -> Option<MonteCarloSummary> {
    if trials == 0 {
        return None;
    }
    errors.keep("empirical", monte_carlo_with(cfg, trials, n_test, generator))
}

fn mc_cells(s: &Option<MonteCarloSummary>) -> [String; 2] {
    [opt_num(s.as_ref().map(|s| s.mean_accuracy)), opt_num(s.as_ref().map(|s| s.std_accuracy))]
}

fn run_settings(cfg: &ExperimentConfig, trials: usize, n_test: usize) -> Value {
    json!({ "config": cfg, "seed": cfg.seed, "trials": trials, "n_test": n_test })
}

fn extend(mut v: Value, extra: Value) -> Value {
    if let (Some(obj), Value::Object(extra)) = (v.as_object_mut(), extra) {
        obj.extend(extra);
    }
    v
}

pub fn deltas(args: &DeltasArgs) -> CliResult<Output> {
    let cfg = args.common.config()?;
    if cfg.n == 0 {
        return Err(CliError::Usage("deltas sweeps p/n and needs n > 0".into()));
    }
    let grid = args.common.grid_or("0.00001:2:50");
    if grid.values().iter().any(|&r| r <= 0.0) {
        return Err(CliError::Usage("p/n grid values must be positive".into()));
    }
    let meta = metadata("deltas", json!({ "config": cfg, "seed": cfg.seed, "grid": grid }));
    let mut table = Table::new(meta, &["ratio", "delta_r", "delta_s", "delta_g", "iterations", "residual", "error"]);
    for &ratio in grid.values() {
        let r = ratios_at(&cfg, ratio * cfg.n as f64);
        let inputs = DeltaInputs { eta: r.eta, eta_hat: r.eta_hat, pi: r.pi, alpha: r.alpha, gamma: cfg.gamma };
        let row = match solve_deltas(inputs, SolverOptions::default()) {
            Ok(d) => vec![
                num(ratio),
                num(d.delta_r),
                num(d.delta_s),
                num(d.delta_g),
                d.iterations.to_string(),
                num(d.residual),
                String::new(),
            ],
            Err(e) => {
                let mut row = vec![num(ratio)];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(e.to_string());
                row
            }
        };
        table.push(row);
    }
    Ok(Output::Table(table))
}

/// ε equal to the error of a ridge classifier on `m` clean, unpruned synthetic samples.
pub fn coupled_epsilon(cfg: &ExperimentConfig) -> synthmix::Result<f64> {
    let eta_s = cfg.p as f64 / cfg.m as f64;
    let acc = corollary_synthetic_stats(eta_s, 1.0, 1.0, cfg.gamma, cfg.mu_norm_sq())?.accuracy;
    Ok(1.0 - acc)
}

fn point_with_proportion(base: &ExperimentConfig, proportion: f64) -> CliResult<ExperimentConfig> {
    let m = synthetic_count(base.n, proportion)?;
    Ok(ExperimentConfig { m, ..base.clone() })
}

pub fn mixing(args: &MixingArgs) -> CliResult<Output> {
    let common = &args.common;
    let base = common.config()?;
    let (trials, n_test) = (common.trials(), common.n_test()?);
    let grid = common.grid_or("0:0.9:10");
    let presets: Vec<&str> = args.presets.iter().map(|p| p.name()).collect();
    let mode = match args.epsilon_mode {
        EpsilonMode::Fixed => "fixed",
        EpsilonMode::Coupled => "coupled",
    };
    let meta = metadata(
        "mixing",
        extend(run_settings(&base, trials, n_test), json!({ "grid": grid, "presets": presets, "epsilon_mode": mode })),
    );
    let mut table = Table::new(
        meta,
        &[
            "proportion", "preset", "rho", "phi", "epsilon", "m", "theory_accuracy", "empirical_mean",
            "empirical_std", "error",
        ],
    );
    for &preset in &args.presets {
        let (rho, phi) = preset.rho_phi();
        for &proportion in grid.values() {
            let mut cfg = point_with_proportion(&ExperimentConfig { rho, phi, ..base.clone() }, proportion)?;
            let mut errors = RowErrors::default();
            if args.epsilon_mode == EpsilonMode::Coupled && cfg.m > 0 {
                if let Some(eps) = errors.keep("coupled epsilon", coupled_epsilon(&cfg)) {
                    cfg.epsilon = eps;
                }
            }
            let theory = errors.keep("theory", theory_for_config::<f64>(&cfg)).map(|t| t.stats.accuracy);
            let emp = empirical(&cfg, trials, n_test, &GeneratorSpec::Fitted, &mut errors);
            let [mean, std] = mc_cells(&emp);
            table.push(vec![
                num(proportion),
                preset.name().into(),
                num(rho),
                num(phi),
                num(cfg.epsilon),
                cfg.m.to_string(),
                opt_num(theory),
                mean,
                std,
                errors.cell(),
            ]);
        }
    }
    Ok(Output::Table(table))
}

pub fn phase(args: &PhaseArgs) -> CliResult<Output> {
    let common = &args.common;
    // Fully synthetic training: no real samples.
    let base = ExperimentConfig { n: 0, ..common.base_config()? };
    let ms = args.m_grid.counts("m").map_err(CliError::Usage)?;
    if ms.contains(&0) {
        return Err(CliError::Usage("m grid values must be positive".into()));
    }
    base.validate()?;
    let (trials, n_test) = (common.trials(), common.n_test()?);
    let grid = common.grid_or("0:1:41");
    let eps_star = critical_epsilon(base.rho, base.phi).ok();
    let meta = metadata(
        "phase",
        extend(
            run_settings(&base, trials, n_test),
            json!({ "grid": grid, "m_grid": args.m_grid, "critical_epsilon": eps_star }),
        ),
    );
    let mut table = Table::new(
        meta,
        &[
            "epsilon", "m", "eta_s", "alpha", "lambda", "theory_accuracy", "empirical_mean", "empirical_std",
            "error",
        ],
    );
    // The closed form assumes an exact generator, so the simulation uses one too.
    let exact = GeneratorSpec::Fixed(GeneratorModel::isotropic(mean_vector(base.p, base.mu_norm), 1.0));
    for &m in &ms {
        for &epsilon in grid.values() {
            let cfg = ExperimentConfig { m, epsilon, ..base.clone() };
            cfg.validate()?;
            let eta_s = cfg.p as f64 / m as f64;
            let (alpha, lambda) = pruner_moments(epsilon, cfg.rho, cfg.phi);
            let mut errors = RowErrors::default();
            let theory = errors
                .keep("theory", corollary_synthetic_stats(eta_s, alpha, lambda, cfg.gamma, cfg.mu_norm_sq()))
                .map(|s| s.accuracy);
            let emp = empirical(&cfg, trials, n_test, &exact, &mut errors);
            let [mean, std] = mc_cells(&emp);
            table.push(vec![
                num(epsilon),
                m.to_string(),
                num(eta_s),
                num(alpha),
                num(lambda),
                opt_num(theory),
                mean,
                std,
                errors.cell(),
            ]);
        }
    }
    Ok(Output::Table(table))
}

pub const DENSITY_POINTS: usize = 512;

/// Density sample locations on the support, clustered toward both edges so
/// that a trapezoid rule resolves the edge behaviour.
pub fn density_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
            lo + (hi - lo) * s
        })
        .collect()
}

pub fn spectrum_cmd(args: &SpectrumArgs) -> CliResult<Output> {
    let cfg = args.common.config()?;
    let n_hats = match &args.n_hat_grid {
        Some(g) => g.counts("n_hat").map_err(CliError::Usage)?,
        None => vec![cfg.n_hat],
    };
    if n_hats.contains(&0) {
        return Err(CliError::Usage("n_hat grid values must be positive".into()));
    }
    let meta = metadata("spectrum", json!({ "config": cfg, "seed": cfg.seed, "n_hat_grid": n_hats }));
    let mut table = Table::new(meta, &["n_hat", "kind", "index", "x", "value"]);
    let mu = mean_vector(cfg.p, cfg.mu_norm);
    for (i, &n_hat) in n_hats.iter().enumerate() {
        let mut rng = stream(cfg.seed, i as u64, Purpose::GeneratorTrain);
        let gen = fit_generator(&sample_real(n_hat, cfg.p, &mu, &mut rng))?;
        let eig = spectrum(&gen.cov_hat)?;
        let ratio = cfg.p as f64 / n_hat as f64;
        let k = eig.len() as f64;
        let nh = n_hat.to_string();
        for (j, &x) in eig.iter().enumerate() {
            table.push(vec![nh.clone(), "eigenvalue".into(), j.to_string(), num(x), num((j + 1) as f64 / k)]);
        }
        let (lo, hi) = mp_support(ratio)?;
        for (j, x) in density_grid(lo, hi, DENSITY_POINTS).into_iter().enumerate() {
            let d = marchenko_pastur_density(x, ratio)?;
            table.push(vec![nh.clone(), "density".into(), j.to_string(), num(x), num(d)]);
        }
        table.push(vec![nh.clone(), "atom".into(), "0".into(), num(0.0), num(mp_point_mass(ratio)?)]);
        let ks = kolmogorov_distance_mp(&eig, ratio)?;
        table.push(vec![nh, "kolmogorov".into(), "0".into(), String::new(), num(ks)]);
    }
    Ok(Output::Table(table))
}

pub fn theory(args: &CommonArgs) -> CliResult<Output> {
    let cfg = args.config()?;
    let report = theory_for_config::<f64>(&cfg)?;
    let isotropic = match isotropic_stats::<f64>(&cfg) {
        Ok(s) => to_value(&s),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let eps_star = critical_epsilon(cfg.rho, cfg.phi).ok();
    Ok(Output::Json(json!({
        "meta": metadata("theory", json!({ "config": cfg, "seed": cfg.seed })),
        "report": to_value(&report),
        "isotropic": isotropic,
        "critical_epsilon": eps_star,
    })))
}

pub fn simulate(args: &CommonArgs) -> CliResult<Output> {
    let cfg = args.config()?;
    let (trials, n_test) = (args.trials(), args.n_test()?);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let summary = monte_carlo(&cfg, trials, n_test)?;
    let theory = theory_for_config::<f64>(&cfg).ok().map(|t| t.stats);
    Ok(Output::Json(json!({
        "meta": metadata("simulate", run_settings(&cfg, trials, n_test)),
        "summary": to_value(&summary),
        "theory": theory.map(|t| to_value(&t)),
    })))
}

fn z_score(empirical: f64, theory: f64, spread: f64, trials: usize) -> Option<f64> {
    let se = spread / (trials as f64).sqrt();
    (se > 0.0).then(|| (empirical - theory) / se)
}

pub fn validate(args: &ValidateArgs) -> CliResult<Outcome> {
    let common = &args.common;
    let cfg = common.config()?;
    let (trials, n_test) = (common.trials(), common.n_test()?);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut checks = Vec::new();
    let theory = theory_for_config::<f64>(&cfg).map(|t| t.stats);
    checks.push(json!({
        "name": "theory",
        "passed": theory.is_ok(),
        "detail": theory.as_ref().err().map(|e| e.to_string()),
    }));
    let emp = monte_carlo(&cfg, trials, n_test);
    checks.push(json!({
        "name": "empirical",
        "passed": emp.is_ok(),
        "detail": emp.as_ref().err().map(|e| e.to_string()),
    }));

    let mut z = json!({});
    if let (Ok(t), Ok(e)) = (&theory, &emp) {
        let gap = (e.mean_accuracy - t.accuracy).abs();
        checks.push(json!({
            "name": "accuracy",
            "passed": gap <= args.tolerance,
            "detail": format!("|{} - {}| = {gap} against tolerance {}", e.mean_accuracy, t.accuracy, args.tolerance),
        }));
        let sd = |f: fn(&synthmix::simulate::TrialOutcome) -> f64| {
            let v: Vec<f64> = e.outcomes.iter().map(f).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            if v.len() < 2 {
                return 0.0;
            }
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        z = json!({
            "accuracy": z_score(e.mean_accuracy, t.accuracy, e.std_accuracy, trials),
            "decision_mean": z_score(e.mean_decision_mean, t.mean, sd(|o| o.decision_mean), trials),
            "decision_var": z_score(e.mean_decision_var, t.variance, sd(|o| o.decision_var), trials),
        });
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap_or_default().to_string())
        .collect();
    let passed = failed.is_empty();
    let empirical = emp.as_ref().ok().map(|e| {
        json!({
            "mean_accuracy": e.mean_accuracy,
            "std_accuracy": e.std_accuracy,
            "mean_decision_mean": e.mean_decision_mean,
            "mean_decision_var": e.mean_decision_var,
        })
    });
    let output = Output::Json(json!({
        "meta": metadata("validate", extend(run_settings(&cfg, trials, n_test), json!({ "tolerance": args.tolerance }))),
        "theory": theory.as_ref().ok().map(to_value),
        "empirical": empirical,
        "z_scores": z,
        "checks": checks,
        "passed": passed,
    }));
    Ok(Outcome { output, failure: (!passed).then(|| format!("failed checks: {}", failed.join(", "))) })
}

pub fn ingest(args: &IngestArgs) -> CliResult<Output> {
    let common = &args.common;
    let label_column: LabelColumn = args.label_column.parse().expect("infallible");
    let data = load_csv(&args.csv, &label_column, args.positive_label.as_deref())?;
    let mu_norm = estimate_mu_norm(&data)?;
    let base = ExperimentConfig { p: data.dim(), mu_norm, ..common.base_config()? };
    base.validate()?;
    let trials = common.trials();
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let grid = common.grid_or("0:0.75:4");
    let n_test_rows = ((data.len() as f64 * args.test_fraction).round() as usize).max(1);
    let n_train_rows = data.len().saturating_sub(n_test_rows);
    let presets: Vec<&str> = args.presets.iter().map(|p| p.name()).collect();
    let meta = metadata(
        "ingest",
        json!({
            "config": base,
            "seed": base.seed,
            "trials": trials,
            "grid": grid,
            "presets": presets,
            "rows": data.len(),
            "test_fraction": args.test_fraction,
            "label_values": data.label_values,
            "estimated_mu_norm": mu_norm,
        }),
    );
    let mut table = Table::new(
        meta,
        &["proportion", "preset", "m", "theory_accuracy", "empirical_mean", "empirical_std", "error"],
    );
    let options =
        MixingOptions { proportions: grid.values().to_vec(), trials, test_fraction: args.test_fraction };
    for &preset in &args.presets {
        let (rho, phi) = preset.rho_phi();
        let cfg = ExperimentConfig { rho, phi, ..base.clone() };
        let records = real_data_mixing_run(&data, &cfg, &options)?;
        for rec in records {
            let point = ExperimentConfig { m: rec.m, n_hat: cfg.n_hat.min(n_train_rows).max(1), ..cfg.clone() };
            let mut errors = RowErrors::default();
            let theory = errors.keep("theory", theory_for_config::<f64>(&point)).map(|t| t.stats.accuracy);
            table.push(vec![
                num(rec.proportion),
                preset.name().into(),
                rec.m.to_string(),
                opt_num(theory),
                num(rec.mean_accuracy),
                num(rec.std_accuracy),
                errors.cell(),
            ]);
        }
    }
    Ok(Output::Table(table))
}
