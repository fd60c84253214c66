//! Generic one-variable sweeps read from JSON.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use synthmix::datasets::synthetic_count;
use synthmix::simulate::GeneratorSpec;
use synthmix::theory::theory_for_config;
use synthmix::ExperimentConfig;

use crate::args::{SweepArgs, DEFAULT_N_TEST, DEFAULT_TRIALS};
use crate::commands::{empirical, RowErrors};
use crate::error::{CliError, CliResult};
use crate::output::{metadata, num, opt_num, Output, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// m / (n + m) with n fixed.
    SyntheticProportion,
    Epsilon,
    /// p / n with n fixed; p is rounded to the nearest integer.
    POverN,
    /// p / m with p fixed; m is rounded to the nearest integer.
    EtaS,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SyntheticProportion => "synthetic_proportion",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::POverN => "p_over_n",
            SweepVariable::EtaS => "eta_s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Theory,
    Empirical,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_n_test() -> usize {
    DEFAULT_N_TEST
}

fn default_outputs() -> BTreeSet<OutputKind> {
    [OutputKind::Theory, OutputKind::Empirical].into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub base: ExperimentConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_outputs")]
    pub outputs: BTreeSet<OutputKind>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let spec_err = |reason: String| CliError::Spec { path: path.to_path_buf(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| spec_err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| spec_err(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.base.validate()?;
        let usage = |s: String| Err(CliError::Usage(s));
        if self.grid.is_empty() {
            return usage("sweep grid is empty".into());
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return usage("sweep grid must be strictly ascending".into());
        }
        if self.outputs.contains(&OutputKind::Empirical) && (self.trials == 0 || self.n_test == 0) {
            return usage("empirical sweeps need trials and n_test of at least 1".into());
        }
        let ok = |v: f64| match self.variable {
            SweepVariable::SyntheticProportion => (0.0..1.0).contains(&v),
            SweepVariable::Epsilon => (0.0..=1.0).contains(&v),
            SweepVariable::POverN | SweepVariable::EtaS => v > 0.0 && v.is_finite(),
        };
        if let Some(bad) = self.grid.iter().find(|&&v| !ok(v)) {
            return usage(format!("{bad} is outside the domain of {}", self.variable.name()));
        }
        if self.variable == SweepVariable::POverN && self.base.n == 0 {
            return usage("p_over_n sweeps need n > 0".into());
        }
        Ok(())
    }

    /// Config at one grid value.
    pub fn point(&self, value: f64) -> CliResult<ExperimentConfig> {
        let mut cfg = self.base.clone();
        match self.variable {
            SweepVariable::SyntheticProportion => cfg.m = synthetic_count(cfg.n, value)?,
            SweepVariable::Epsilon => cfg.epsilon = value,
            SweepVariable::POverN => cfg.p = ((value * cfg.n as f64).round() as usize).max(1),
            SweepVariable::EtaS => cfg.m = ((cfg.p as f64 / value).round() as usize).max(1),
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(args: &SweepArgs) -> CliResult<Output> {
    let mut spec = SweepSpec::load(&args.spec)?;
    let common = &args.common;
    common.apply(&mut spec.base);
    if let Some(g) = &common.grid {
        spec.grid = g.values().to_vec();
    }
    if let Some(t) = common.trials {
        spec.trials = t;
    }
    if let Some(k) = common.n_test {
        spec.n_test = k;
    }
    spec.validate()?;
    sweep(&spec)
}

pub fn sweep(spec: &SweepSpec) -> CliResult<Output> {
    let meta = metadata("sweep", json!({ "spec": spec, "seed": spec.base.seed }));
    let mut table = Table::new(
        meta,
        &[spec.variable.name(), "p", "m", "epsilon", "theory_accuracy", "empirical_mean", "empirical_std", "error"],
    );
    let want_theory = spec.outputs.contains(&OutputKind::Theory);
    let trials = if spec.outputs.contains(&OutputKind::Empirical) { spec.trials } else { 0 };
    for &value in &spec.grid {
        let cfg = spec.point(value)?;
        let mut errors = RowErrors::default();
        let theory = if want_theory {
            errors.keep("theory", theory_for_config::<f64>(&cfg)).map(|t| t.stats.accuracy)
        } else {
            None
        };
        let emp = empirical(&cfg, trials, spec.n_test, &GeneratorSpec::Fitted, &mut errors);
        table.push(vec![
            num(value),
            cfg.p.to_string(),
            cfg.m.to_string(),
            num(cfg.epsilon),
            opt_num(theory),
            opt_num(emp.as_ref().map(|e| e.mean_accuracy)),
            opt_num(emp.as_ref().map(|e| e.std_accuracy)),
            errors.cell(),
        ]);
    }
    Ok(Output::Table(table))
}
