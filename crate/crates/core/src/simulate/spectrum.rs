//! Eigenvalue diagnostics for fitted covariances.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::theory::mp_cdf;

/// Ascending eigenvalues of a symmetric matrix.
pub fn spectrum(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !cov.is_square() {
        return Err(Error::InvalidInput(format!("matrix is {}×{}, not square", cov.nrows(), cov.ncols())));
    }
    let asym = (cov - cov.transpose()).amax();
    if asym > 1e-8 * cov.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidInput(format!("matrix is not symmetric (max deviation {asym:e})")));
    }
    let mut values: Vec<f64> = SymmetricEigen::new(cov.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Sup distance between the empirical distribution of `sorted` and the
/// limiting law at ratio `p / n̂`.
pub fn kolmogorov_distance_mp(sorted: &[f64], ratio: f64) -> Result<f64> {
    let k = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = mp_cdf(x, ratio)?;
        let below = i as f64 / k;
        let at = (i + 1) as f64 / k;
        worst = worst.max((at - f).abs()).max((f - below).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::data::{fit_generator, mean_vector, sample_real};
    use crate::simulate::rng::{stream, Purpose};

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(spectrum(&DMatrix::identity(4, 4)).unwrap(), vec![1.0; 4]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 4.0, 2.0]));
        let s = spectrum(&d).unwrap();
        for (got, want) in s.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 0.1;
        assert!(spectrum(&m).is_err());
        assert!(spectrum(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn square_fit_follows_the_limit_law() {
        let p = 300;
        let mut r = stream(11, 0, Purpose::GeneratorTrain);
        let d = sample_real(p, p, &mean_vector(p, 1.0), &mut r);
        let s = spectrum(&fit_generator(&d).unwrap().cov_hat).unwrap();
        let dist = kolmogorov_distance_mp(&s, 1.0).unwrap();
        assert!(dist < 0.06, "{dist}");
    }

    #[test]
    fn distance_of_exact_quantiles_is_small() {
        // Midpoint quantiles of the law itself, located by bisection.
        let ratio = 0.5;
        let k = 200;
        let (lo, hi) = crate::theory::mp_support(ratio).unwrap();
        let pts: Vec<f64> = (0..k)
            .map(|i| {
                let target = (i as f64 + 0.5) / k as f64;
                let (mut a, mut b) = (lo, hi);
                for _ in 0..60 {
                    let c = 0.5 * (a + b);
                    if mp_cdf(c, ratio).unwrap() < target {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                0.5 * (a + b)
            })
            .collect();
        let dist = kolmogorov_distance_mp(&pts, ratio).unwrap();
        assert!((dist - 0.5 / k as f64).abs() < 1e-6, "{dist}");
    }
}
