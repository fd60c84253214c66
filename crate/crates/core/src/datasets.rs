//! Labelled tabular data from CSV and the mixing experiment on real features.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::simulate::{fit_generator, prune, sample_synthetic, stream, train_ridge, LabeledMatrix, Purpose};

/// Standardized features (p × k, columns are rows of the CSV) with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<i8>,
    pub feature_means: DVector<f64>,
    pub feature_scales: DVector<f64>,
    pub feature_names: Vec<String>,
    /// Raw label values mapped to −1 and +1, in that order.
    pub label_values: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// All-digit strings are indices, anything else a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl TabularDataset {
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Features on the original scale.
    pub fn raw_features(&self) -> DMatrix<f64> {
        unstandardize(&self.features, &self.feature_means, &self.feature_scales)
    }
}

/// Row-wise centering and scaling; rows with zero spread get scale 1.
pub fn standardize(raw: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let k = raw.ncols().max(1) as f64;
    let means = raw.column_mean();
    let scales = DVector::from_iterator(
        raw.nrows(),
        raw.row_iter().zip(means.iter()).map(|(row, &m)| {
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / k;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        }),
    );
    (apply_standardization(raw, &means, &scales), means, scales)
}

pub fn apply_standardization(raw: &DMatrix<f64>, means: &DVector<f64>, scales: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| (raw[(i, j)] - means[i]) / scales[i])
}

pub fn unstandardize(z: &DMatrix<f64>, means: &DVector<f64>, scales: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)] * scales[i] + means[i])
}

/// Reads a CSV with a header row.
///
/// The two label values map to −1 and +1 in lexicographic order unless
/// `positive_label` names the +1 value.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, positive_label: Option<&str>) -> Result<TabularDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_csv(file, label_column, positive_label)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    label_column: &LabelColumn,
    positive_label: Option<&str>,
) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let width = headers.len();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Dataset(format!("label column {i} out of range ({width} columns)")))
        }
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Dataset(format!("no column named `{name}`")))?,
    };
    let feature_names: Vec<String> =
        headers.iter().enumerate().filter(|&(i, _)| i != label_idx).map(|(_, h)| h.clone()).collect();

    let mut raw_labels = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        if record.len() != width {
            return Err(Error::Dataset(format!("line {line}: {} fields, header has {width}", record.len())));
        }
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Dataset(format!("line {line}, column `{}`: `{cell}` is not a number", headers[i]))
            })?;
            if !v.is_finite() {
                return Err(Error::Dataset(format!("line {line}, column `{}`: non-finite value", headers[i])));
            }
            values.push(v);
        }
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::Dataset(format!(
            "label column must hold exactly two distinct values, found {}",
            distinct.len()
        )));
    }
    let mut pair: Vec<&str> = distinct.into_iter().collect();
    if let Some(pos) = positive_label {
        match pair.iter().position(|&v| v == pos) {
            Some(0) => pair.swap(0, 1),
            Some(_) => {}
            None => return Err(Error::Dataset(format!("positive label `{pos}` does not occur"))),
        }
    }
    let labels = raw_labels.iter().map(|v| if v == pair[1] { 1 } else { -1 }).collect();

    let p = feature_names.len();
    let raw = DMatrix::from_column_slice(p, raw_labels.len(), &values);
    let (features, feature_means, feature_scales) = standardize(&raw);
    Ok(TabularDataset {
        features,
        labels,
        feature_means,
        feature_scales,
        feature_names,
        label_values: [pair[0].to_string(), pair[1].to_string()],
    })
}

/// `‖(1/k) Σ yᵢxᵢ‖`.
pub fn estimate_mu_norm(data: &TabularDataset) -> Result<f64> {
    let plus = data.labels.iter().filter(|&&y| y == 1).count();
    if plus == 0 || plus == data.len() {
        return Err(Error::Dataset("need samples from both classes".into()));
    }
    let mut acc = DVector::zeros(data.dim());
    for (col, &y) in data.features.column_iter().zip(&data.labels) {
        acc.axpy(f64::from(y), &col, 1.0);
    }
    Ok(acc.norm() / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingOptions {
    /// Synthetic share m / (n + m) of the training set, each in [0, 1).
    pub proportions: Vec<f64>,
    pub trials: usize,
    /// Share of rows held out for testing.
    pub test_fraction: f64,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions { proportions: vec![0.0], trials: 1, test_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingRecord {
    pub proportion: f64,
    pub m: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Test accuracy of each trial, in trial order.
    pub accuracies: Vec<f64>,
}

/// Synthetic sample count giving share `proportion` next to `n` real samples.
pub fn synthetic_count(n: usize, proportion: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&proportion) {
        return Err(Error::config("proportion", format!("must lie in [0, 1), got {proportion}")));
    }
    Ok((n as f64 * proportion / (1.0 - proportion)).round() as usize)
}

/// Mixing experiment on a real dataset.
///
/// Each trial draws a fresh train/test split, standardizes with training
/// statistics, fits the generator on the first `min(n_hat, train rows)`
/// training rows and trains on the first `n` of them plus pruned synthetic
/// samples for every proportion. `config.p` is ignored in favour of the
/// dataset's dimension and `config.m` is replaced by the proportion grid.
pub fn real_data_mixing_run(
    data: &TabularDataset,
    config: &ExperimentConfig,
    options: &MixingOptions,
) -> Result<Vec<MixingRecord>> {
    let cfg = ExperimentConfig { p: data.dim(), ..config.clone() };
    cfg.validate()?;
    if options.trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    if options.proportions.is_empty() {
        return Err(Error::config("proportions", "grid is empty"));
    }
    if !(options.test_fraction > 0.0 && options.test_fraction < 1.0) {
        return Err(Error::config("test_fraction", "must lie in (0, 1)"));
    }
    let counts = options
        .proportions
        .iter()
        .map(|&q| synthetic_count(cfg.n, q))
        .collect::<Result<Vec<_>>>()?;
    let k = data.len();
    let n_test = ((k as f64 * options.test_fraction).round() as usize).max(1);
    if cfg.n == 0 || k < n_test + cfg.n {
        return Err(Error::Dataset(format!(
            "{k} rows cannot supply n = {} training rows plus {n_test} test rows",
            cfg.n
        )));
    }
    let raw = data.raw_features();

    let per_trial = (0..options.trials as u64)
        .into_par_iter()
        .map(|t| mixing_trial(&raw, &data.labels, &cfg, &counts, n_test, t))
        .collect::<Result<Vec<_>>>()?;

    Ok(options
        .proportions
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(g, (&proportion, &m))| {
            let accuracies: Vec<f64> = per_trial.iter().map(|row| row[g]).collect();
            let (mean, var) = crate::simulate::ridge::mean_and_variance(&accuracies);
            MixingRecord { proportion, m, mean_accuracy: mean, std_accuracy: var.sqrt(), accuracies }
        })
        .collect())
}

fn mixing_trial(
    raw: &DMatrix<f64>,
    labels: &[i8],
    cfg: &ExperimentConfig,
    counts: &[usize],
    n_test: usize,
    trial: u64,
) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut stream(cfg.seed, trial, Purpose::Split));
    let (test_idx, train_idx) = order.split_at(n_test);

    let train_raw = raw.select_columns(train_idx);
    let (train_z, means, scales) = standardize(&train_raw);
    let test_z = apply_standardization(&raw.select_columns(test_idx), &means, &scales);
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<i8>>();
    let train_labels = pick(train_idx);

    let take = |count: usize| LabeledMatrix {
        features: train_z.columns(0, count).into_owned(),
        labels: train_labels[..count].to_vec(),
        true_labels: None,
        keep_mask: None,
    };
    let real = take(cfg.n);
    let generator = fit_generator(&take(cfg.n_hat.min(train_idx.len())))?;
    let test_labels = pick(test_idx);

    counts
        .iter()
        .map(|&m| {
            let synthetic = if m == 0 {
                LabeledMatrix::empty(cfg.p)
            } else {
                let raw_syn = sample_synthetic(m, &generator, cfg.epsilon, &mut stream(cfg.seed, trial, Purpose::Synthetic));
                prune(&raw_syn, cfg.rho, cfg.phi, &mut stream(cfg.seed, trial, Purpose::Prune))?
            };
            let model = train_ridge(&real, &synthetic, cfg.gamma)?;
            let scores = model.weights.transpose() * &test_z;
            let correct = scores.iter().zip(&test_labels).filter(|&(&s, &y)| (s >= 0.0) == (y > 0)).count();
            Ok(correct as f64 / n_test as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, col: &str, pos: Option<&str>) -> Result<TabularDataset> {
        read_csv(Cursor::new(text.as_bytes().to_vec()), &col.parse().unwrap(), pos)
    }

    #[test]
    fn lexicographic_label_mapping() {
        let d = parse("x,y,label\n1,2,b\n3,1,a\n0,0,a\n5,2,b\n", "label", None).unwrap();
        assert_eq!(d.labels, vec![1, -1, -1, 1]);
        assert_eq!(d.label_values, ["a".to_string(), "b".to_string()]);
        let d = parse("x,y,label\n1,2,b\n3,1,a\n0,0,a\n5,2,b\n", "2", Some("a")).unwrap();
        assert_eq!(d.labels, vec![-1, 1, 1, -1]);
        assert_eq!(d.feature_names, vec!["x", "y"]);
    }

    #[test]
    fn constant_feature_keeps_unit_scale() {
        let d = parse("c,x,y\n4,1,u\n4,2,v\n4,6,u\n", "y", None).unwrap();
        assert_eq!(d.feature_scales[0], 1.0);
        assert!(d.features.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardized_rows_and_round_trip() {
        let text = "a,b,l\n1.5,-3,0\n2.25,10,1\n-7,4.5,0\n0.125,0,1\n9,1,1\n";
        let d = parse(text, "l", None).unwrap();
        for row in d.features.row_iter() {
            let mean = row.mean();
            let sd = (row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64).sqrt();
            assert!(mean.abs() < 1e-10);
            assert!((sd - 1.0).abs() < 1e-8);
        }
        let raw = d.raw_features();
        let want = [1.5, -3.0, 2.25, 10.0, -7.0, 4.5, 0.125, 0.0, 9.0, 1.0];
        for (got, want) in raw.iter().zip(want) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("a,l\n1,x\n2\n", "l", None).is_err());
        assert!(parse("a,l\n1,x\nfoo,y\n", "l", None).is_err());
        assert!(parse("a,l\n1,x\n2,y\n3,z\n", "l", None).is_err());
        assert!(parse("a,l\n1,x\n2,x\n", "l", None).is_err());
        assert!(parse("a,l\n1,x\n2,y\n", "missing", None).is_err());
        assert!(parse("a,l\n1,x\n2,y\n", "5", None).is_err());
        assert!(parse("a,l\n1,x\n2,y\n", "l", Some("q")).is_err());
    }

    #[test]
    fn one_hot_mean_norm_is_one() {
        let mut features = DMatrix::zeros(3, 6);
        let labels = vec![1, -1, 1, 1, -1, -1];
        for (j, &y) in labels.iter().enumerate() {
            features[(0, j)] = f64::from(y);
        }
        let d = TabularDataset {
            features,
            labels,
            feature_means: DVector::zeros(3),
            feature_scales: DVector::from_element(3, 1.0),
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            label_values: ["-1".into(), "1".into()],
        };
        assert_eq!(estimate_mu_norm(&d).unwrap(), 1.0);
        let single = TabularDataset { labels: vec![1; 6], ..d };
        assert!(estimate_mu_norm(&single).is_err());
    }

    #[test]
    fn synthetic_counts() {
        assert_eq!(synthetic_count(1000, 0.0).unwrap(), 0);
        assert_eq!(synthetic_count(1000, 0.5).unwrap(), 1000);
        assert_eq!(synthetic_count(1000, 0.75).unwrap(), 3000);
        assert!(synthetic_count(1000, 1.0).is_err());
    }
}
