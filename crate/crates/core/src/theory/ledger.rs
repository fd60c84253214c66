//! Scalar constants derived from the converged deltas.

use serde::Serialize;

use crate::config::DerivedRatios;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::deltas::Deltas;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarLedger<T> {
    pub alpha: T,
    pub lambda: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub a1: T,
    pub b1: T,
    pub b2: T,
    pub h1: T,
    pub h2: T,
}

/// Evaluates the ledger in the order (α, λ) → (a, b, c) → h2 → (a1, b1, b2) → h1.
pub fn build_ledger<T: Scalar>(
    deltas: &Deltas<T>,
    ratios: &DerivedRatios<T>,
    gamma: T,
) -> Result<ScalarLedger<T>> {
    let one = T::one();
    let DerivedRatios { eta, eta_hat, pi, alpha, lambda, .. } = *ratios;
    let (dr, ds, dg) = (deltas.delta_r, deltas.delta_s, deltas.delta_g);

    let weight = alpha * (one - pi);
    let real = pi / (one + dr);
    let synth = weight / ((one + ds) * (one + dg));

    let a = real + weight / (one + ds);
    let b = gamma + real + synth;
    let c = real + lambda * (one - pi) / (one + ds);

    let h2 = one - synth * synth * eta_hat / (b * b);
    if !(h2 > T::zero()) {
        return Err(Error::InvalidRegime(format!("h2 = {h2} is not positive")));
    }

    let scale = eta / (h2 * b * b);
    let a1 = pi * scale / ((one + dr) * (one + dr));
    let sq_s = (one + ds) * (one + ds);
    let sq_g = (one + dg) * (one + dg);
    let b1 = weight * scale / (sq_s * sq_g);
    let b2 = b1 / sq_g;

    let h1 = one - a1 - b2;
    if !(h1 > T::zero()) {
        return Err(Error::InvalidRegime(format!("h1 = {h1} is not positive")));
    }

    Ok(ScalarLedger { alpha, lambda, a, b, c, a1, b1, b2, h1, h2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::deltas::{solve_deltas, DeltaInputs, SolverOptions};
    use proptest::prelude::*;

    fn ratios(eta: f64, eta_hat: f64, pi: f64, alpha: f64, lambda: f64) -> DerivedRatios<f64> {
        DerivedRatios { eta, eta_hat, pi, eta_s: None, alpha, lambda }
    }

    fn ledger_at(r: DerivedRatios<f64>, gamma: f64) -> (Deltas<f64>, ScalarLedger<f64>) {
        let d = solve_deltas(
            DeltaInputs { eta: r.eta, eta_hat: r.eta_hat, pi: r.pi, alpha: r.alpha, gamma },
            SolverOptions::default(),
        )
        .unwrap();
        (d, build_ledger(&d, &r, gamma).unwrap())
    }

    #[test]
    fn zero_deltas_give_the_low_dimensional_ledger() {
        let d = Deltas { delta_r: 0.0, delta_s: 0.0, delta_g: 0.0, residual: 0.0, iterations: 0 };
        let (pi, alpha, lambda, gamma) = (0.4, 0.7, 0.3, 2.0);
        let l = build_ledger(&d, &ratios(0.0, 0.0, pi, alpha, lambda), gamma).unwrap();
        assert!((l.a - (pi + alpha * (1.0 - pi))).abs() < 1e-15);
        assert!((l.b - (gamma + pi + alpha * (1.0 - pi))).abs() < 1e-15);
        assert!((l.c - (pi + lambda * (1.0 - pi))).abs() < 1e-15);
        assert_eq!((l.a1, l.b1, l.b2, l.h1, l.h2), (0.0, 0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn real_only_ledger() {
        let (d, l) = ledger_at(ratios(0.6, 0.2, 1.0, 0.8, 0.5), 1.0);
        let k = 1.0 / (1.0 + d.delta_r);
        assert!((l.a - k).abs() < 1e-15 && (l.c - k).abs() < 1e-15);
        assert!((l.b - (1.0 + k)).abs() < 1e-15);
        assert_eq!((l.b1, l.b2), (0.0, 0.0));
    }

    // The 60-digit deltas of the (0.5, 0.5, 0.5, 1, 1) oracle pushed through
    // the definitions at the same precision.
    #[test]
    fn matches_high_precision_ledger() {
        let (_, l) = ledger_at(ratios(0.5, 0.5, 0.5, 1.0, 1.0), 1.0);
        let want = [
            ("a", l.a, 0.786_411_941_945_375_47),
            ("b", l.b, 1.745_737_264_318_958_03),
            ("c", l.c, 0.786_411_941_945_375_47),
            ("a1", l.a1, 0.050_629_363_650_988_266),
            ("b1", l.b1, 0.042_727_082_302_162_422),
            ("b2", l.b2, 0.034_434_877_619_636_958),
            ("h1", l.h1, 0.914_935_758_729_374_78),
            ("h2", l.h2, 0.979_083_313_345_016_79),
        ];
        for (name, got, exp) in want {
            assert!((got - exp).abs() < 1e-12, "{name}: {got} vs {exp}");
        }
    }

    #[test]
    fn tiny_ratios_approach_the_low_dimensional_ledger() {
        for (pi, alpha, lambda, gamma) in [(0.5, 1.0, 1.0, 1.0), (0.2, 0.6, -0.1, 0.3)] {
            let (_, l) = ledger_at(ratios(1e-8, 1e-8, pi, alpha, lambda), gamma);
            assert!((l.a - (pi + alpha * (1.0 - pi))).abs() < 1e-5);
            assert!((l.b - gamma - l.a).abs() < 1e-5);
            assert!((l.c - (pi + lambda * (1.0 - pi))).abs() < 1e-5);
            assert!((l.h1 - 1.0).abs() < 1e-5 && (l.h2 - 1.0).abs() < 1e-5);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ledger_identities(eta in 0.0..2.0f64, eta_hat in 0.01..2.0f64, pi in 0.0..=1.0f64,
                             alpha in 0.0..=1.0f64, gamma in 0.2..5.0f64) {
            let r = ratios(eta, eta_hat, pi, alpha, 0.5 * alpha);
            let (d, l) = ledger_at(r, gamma);
            let w = alpha * (1.0 - pi);
            let diff = gamma + w / (1.0 + d.delta_s) * (1.0 / (1.0 + d.delta_g) - 1.0);
            prop_assert!(((l.b - l.a) - diff).abs() < 1e-12);
            prop_assert!(l.h2 > 0.0 && l.h2 <= 1.0);
            prop_assert!(l.h1 > 0.0 && l.h1 <= 1.0);
            // δr = η/b at the fixed point ties the solver's b to the ledger's.
            prop_assert!((d.delta_r * l.b - eta).abs() < 1e-10);
        }
    }
}
