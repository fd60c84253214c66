//! Labelled sample matrices and the Gaussian generator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Samples stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    /// p × k.
    pub features: DMatrix<f64>,
    /// Labels seen by the learner, ±1.
    pub labels: Vec<i8>,
    /// Class actually used to generate each synthetic sample.
    pub true_labels: Option<Vec<i8>>,
    /// Verifier decisions; present only after pruning.
    pub keep_mask: Option<Vec<bool>>,
}

impl LabeledMatrix {
    pub fn new(features: DMatrix<f64>, labels: Vec<i8>) -> Result<Self> {
        let m = LabeledMatrix { features, labels, true_labels: None, keep_mask: None };
        m.check()?;
        Ok(m)
    }

    pub fn empty(p: usize) -> Self {
        LabeledMatrix {
            features: DMatrix::zeros(p, 0),
            labels: Vec::new(),
            true_labels: None,
            keep_mask: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_kept(&self, i: usize) -> bool {
        self.keep_mask.as_ref().is_none_or(|m| m[i])
    }

    pub fn kept_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_kept(i)).count()
    }

    pub fn check(&self) -> Result<()> {
        let k = self.features.ncols();
        let bad = |what: &str, len: usize| {
            Err(Error::InvalidInput(format!("{what} has length {len}, expected {k}")))
        };
        if self.labels.len() != k {
            return bad("labels", self.labels.len());
        }
        if let Some(t) = &self.true_labels {
            if t.len() != k {
                return bad("true_labels", t.len());
            }
        }
        if let Some(q) = &self.keep_mask {
            if q.len() != k {
                return bad("keep_mask", q.len());
            }
        }
        if self.labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        Ok(())
    }

    /// Copy holding only kept columns (all columns when unpruned).
    pub fn kept(&self) -> LabeledMatrix {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.is_kept(i)).collect();
        LabeledMatrix {
            features: self.features.select_columns(&idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            true_labels: self.true_labels.as_ref().map(|t| idx.iter().map(|&i| t[i]).collect()),
            keep_mask: None,
        }
    }
}

/// `‖μ‖ e₁` in dimension p.
pub fn mean_vector(p: usize, mu_norm: f64) -> DVector<f64> {
    let mut mu = DVector::zeros(p);
    if p > 0 {
        mu[0] = mu_norm;
    }
    mu
}

fn random_label<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

fn standard_normal_matrix<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(p, k, |_, _| rng.sample(StandardNormal))
}

/// `x = y μ + z`, `z ~ N(0, I)`, labels uniform on ±1.
pub fn sample_real<R: Rng + ?Sized>(n: usize, p: usize, mu: &DVector<f64>, rng: &mut R) -> LabeledMatrix {
    assert_eq!(mu.len(), p, "mean vector has wrong dimension");
    let labels: Vec<i8> = (0..n).map(|_| random_label(rng)).collect();
    let mut features = standard_normal_matrix(p, n, rng);
    for (j, &y) in labels.iter().enumerate() {
        features.column_mut(j).axpy(f64::from(y), mu, 1.0);
    }
    LabeledMatrix { features, labels, true_labels: None, keep_mask: None }
}

/// Gaussian generator `(μ̂, Ĉ, Ĉ^{1/2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    pub mu_hat: DVector<f64>,
    pub cov_hat: DMatrix<f64>,
    pub cov_sqrt: DMatrix<f64>,
}

impl GeneratorModel {
    /// Wraps a fixed mean and covariance.
    pub fn new(mu_hat: DVector<f64>, cov_hat: DMatrix<f64>) -> Result<Self> {
        if cov_hat.shape() != (mu_hat.len(), mu_hat.len()) {
            return Err(Error::InvalidInput("covariance shape does not match mean".into()));
        }
        let cov_sqrt = psd_sqrt(&cov_hat)?;
        Ok(GeneratorModel { mu_hat, cov_hat, cov_sqrt })
    }

    /// `N(±μβ, σ²I)`.
    pub fn isotropic(mu_beta: DVector<f64>, sigma: f64) -> Self {
        let p = mu_beta.len();
        GeneratorModel {
            mu_hat: mu_beta,
            cov_hat: DMatrix::identity(p, p) * (sigma * sigma),
            cov_sqrt: DMatrix::identity(p, p) * sigma,
        }
    }

    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }
}

/// Symmetric square root with roundoff-negative eigenvalues clamped at zero.
pub fn psd_sqrt(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    if let Some(&low) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if low < -1e-10 * scale {
            return Err(Error::Internal(format!("covariance has eigenvalue {low:e}")));
        }
    }
    let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * root[j]);
    Ok(&scaled * v.transpose())
}

/// `μ̂ = (1/n̂) Σ yᵢxᵢ`, `Ĉ = (1/n̂) Σ (yᵢxᵢ − μ̂)(yᵢxᵢ − μ̂)ᵀ`.
pub fn fit_generator(data: &LabeledMatrix) -> Result<GeneratorModel> {
    let k = data.len();
    if k == 0 {
        return Err(Error::InvalidInput("cannot fit a generator on zero samples".into()));
    }
    let mut signed = data.features.clone();
    for (j, &y) in data.labels.iter().enumerate() {
        if y < 0 {
            signed.column_mut(j).neg_mut();
        }
    }
    let mu_hat = signed.column_mean();
    for mut col in signed.column_iter_mut() {
        col -= &mu_hat;
    }
    let mut cov_hat = &signed * signed.transpose() / k as f64;
    // Enforce exact symmetry of the accumulated product.
    let sym = (&cov_hat + cov_hat.transpose()) * 0.5;
    cov_hat = sym;
    GeneratorModel::new(mu_hat, cov_hat)
}

/// `x̃ = ȳ μ̂ + Ĉ^{1/2} z̃`; the learner's label is ȳ flipped with probability ε.
///
/// Per sample, in order: class draw, then one uniform for the flip. Features
/// are drawn afterwards.
pub fn sample_synthetic<R: Rng + ?Sized>(
    m: usize,
    gen: &GeneratorModel,
    epsilon: f64,
    rng: &mut R,
) -> LabeledMatrix {
    let mut true_labels = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let y = random_label(rng);
        let flip = rng.random::<f64>() < epsilon;
        true_labels.push(y);
        labels.push(if flip { -y } else { y });
    }
    let z = standard_normal_matrix(gen.dim(), m, rng);
    let mut features = &gen.cov_sqrt * z;
    for (j, &y) in true_labels.iter().enumerate() {
        features.column_mut(j).axpy(f64::from(y), &gen.mu_hat, 1.0);
    }
    LabeledMatrix { features, labels, true_labels: Some(true_labels), keep_mask: None }
}

/// Keeps a sample with probability φ when its label is right and ρ when wrong,
/// one uniform draw per sample.
pub fn prune<R: Rng + ?Sized>(
    data: &LabeledMatrix,
    rho: f64,
    phi: f64,
    rng: &mut R,
) -> Result<LabeledMatrix> {
    let truth = data
        .true_labels
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("pruning needs the generating labels".into()))?;
    let mask = data
        .labels
        .iter()
        .zip(truth)
        .map(|(&y, &t)| {
            let keep_prob = if y == t { phi } else { rho };
            rng.random::<f64>() < keep_prob
        })
        .collect();
    Ok(LabeledMatrix { keep_mask: Some(mask), ..data.clone() })
}
