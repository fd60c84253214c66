//! Limiting spectral law of a sample covariance with ratio `r = p/n̂`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_ratio<T: Scalar>(ratio: T) -> Result<()> {
    if !(ratio > T::zero() && ratio.is_finite()) {
        return Err(Error::InvalidInput(format!("ratio must be positive, got {ratio}")));
    }
    Ok(())
}

/// Support edges `((1 − √r)², (1 + √r)²)`.
pub fn mp_support<T: Scalar>(ratio: T) -> Result<(T, T)> {
    check_ratio(ratio)?;
    let s = ratio.sqrt();
    let one = T::one();
    Ok(((one - s) * (one - s), (one + s) * (one + s)))
}

/// Absolutely continuous part of the density.
pub fn marchenko_pastur_density<T: Scalar>(x: T, ratio: T) -> Result<T> {
    let (lo, hi) = mp_support(ratio)?;
    if !(x > lo && x < hi) || x <= T::zero() {
        return Ok(T::zero());
    }
    let pi = T::lit(std::f64::consts::PI);
    Ok(((hi - x) * (x - lo)).sqrt() / (T::two() * pi * ratio * x))
}

/// Weight of the atom at zero, `max(0, 1 − 1/r)`.
pub fn mp_point_mass<T: Scalar>(ratio: T) -> Result<T> {
    check_ratio(ratio)?;
    Ok((T::one() - T::one() / ratio).max(T::zero()))
}

/// Distribution function including the atom at zero.
///
/// Substituting `x = λ₋ + (λ₊ − λ₋)(1 − cos t)/2` turns the density into a
/// smooth integrand in `t`, integrated by composite Simpson.
pub fn mp_cdf<T: Scalar>(x: T, ratio: T) -> Result<T> {
    let (lo, hi) = mp_support(ratio)?;
    let atom = mp_point_mass(ratio)?;
    if x < T::zero() {
        return Ok(T::zero());
    }
    if x <= lo {
        return Ok(atom);
    }
    if x >= hi {
        return Ok(T::one());
    }
    let one = T::one();
    let half_width = T::half() * (hi - lo);
    let t_end = (one - (x - lo) / half_width).max(-one).min(one).acos();
    let pi = T::lit(std::f64::consts::PI);
    let integrand = |t: T| {
        let s = t.sin();
        let xt = lo + half_width * (one - t.cos());
        if xt <= T::zero() {
            // ratio = 1 and t = 0: sin²t / x(t) → 2 / half_width.
            return half_width / (pi * ratio);
        }
        half_width * half_width * s * s / (T::two() * pi * ratio * xt)
    };
    let panels = 512;
    let h = t_end / T::from_usize(2 * panels).expect("small");
    let mut acc = integrand(T::zero()) + integrand(t_end);
    for k in 1..2 * panels {
        let w = if k % 2 == 1 { T::lit(4.0) } else { T::two() };
        acc += w * integrand(h * T::from_usize(k).expect("small"));
    }
    Ok((atom + acc * h / T::lit(3.0)).min(one))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent adaptive Simpson; the x = lo + u² substitution removes the
    // square-root singularity at the lower edge, and the upper edge is handled
    // by splitting at the midpoint and substituting from the other side.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (fa, fb, fc) = (f(a), f(b), f(c));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
        adapt(f, a, b, fa, fb, fc, whole, tol, depth)
    }

    #[allow(clippy::too_many_arguments)]
    fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, fc: f64,
             whole: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
        let (fd, fe) = (f(d), f(e));
        let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
        let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        adapt(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
            + adapt(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
    }

    fn total_mass(ratio: f64) -> f64 {
        let (lo, hi) = mp_support(ratio).unwrap();
        let mid = 0.5 * (lo + hi);
        let h = (mid - lo).sqrt();
        let lower = |u: f64| 2.0 * u * marchenko_pastur_density(lo + u * u, ratio).unwrap();
        let upper = |u: f64| 2.0 * u * marchenko_pastur_density(hi - u * u, ratio).unwrap();
        simpson(&lower, 0.0, h, 1e-12, 50)
            + simpson(&upper, 0.0, (hi - mid).sqrt(), 1e-12, 50)
            + mp_point_mass(ratio).unwrap()
    }

    #[test]
    fn integrates_to_one() {
        for r in [0.05, 0.2, 0.5, 0.99, 1.5, 3.0, 10.0] {
            let m = total_mass(r);
            assert!((m - 1.0).abs() < 1e-6, "ratio {r}: mass {m}");
        }
    }

    #[test]
    fn cdf_matches_quadrature_of_the_density() {
        for r in [0.2, 1.0, 2.5] {
            let (lo, hi) = mp_support(r).unwrap();
            for frac in [0.1, 0.37, 0.5, 0.9] {
                let x = lo + frac * (hi - lo);
                let lower = |u: f64| 2.0 * u * marchenko_pastur_density(lo + u * u, r).unwrap();
                let want = simpson(&lower, 0.0, (x - lo).sqrt(), 1e-12, 50) + mp_point_mass(r).unwrap();
                let got = mp_cdf(x, r).unwrap();
                assert!((got - want).abs() < 1e-8, "ratio {r} x {x}: {got} vs {want}");
            }
            assert_eq!(mp_cdf(hi + 1.0, r).unwrap(), 1.0);
            assert_eq!(mp_cdf(-1.0, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_ratio_support() {
        assert_eq!(mp_support(1.0).unwrap(), (0.0, 4.0));
        assert_eq!(mp_point_mass(1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_outside_support() {
        let (lo, hi) = mp_support(0.3).unwrap();
        for x in [-1.0, 0.0, lo * 0.99, lo, hi, hi * 1.01, 100.0] {
            assert_eq!(marchenko_pastur_density(x, 0.3).unwrap(), 0.0);
        }
        assert!(marchenko_pastur_density(1.0, 0.3).unwrap() > 0.0);
    }

    #[test]
    fn rejects_nonpositive_ratio() {
        assert!(marchenko_pastur_density(1.0, 0.0).is_err());
        assert!(mp_point_mass(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn density_is_nonnegative(x in -1.0..20.0f64, r in 0.01..5.0f64) {
            prop_assert!(marchenko_pastur_density(x, r).unwrap() >= 0.0);
        }
    }
}
